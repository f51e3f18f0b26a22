// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "depth.hpp"
#include "error.hpp"
#include "interfaces.hpp"
#include "loss.hpp"
#include "optimizer.hpp"
#include "trajectory.hpp"

namespace scene_forge {

struct StageSpec {
    enum class Kind { ZoomOut, Orbit };
    Kind kind = Kind::ZoomOut;
    double travel = 1.0;     // zoom-out, capped by the collision bound
    double angle_deg = 180.0; // orbit, positive turns left
    int frames = kTrajectoryLength;

    static StageSpec zoom_out(double travel) { return {Kind::ZoomOut, travel, 0.0, kTrajectoryLength}; }
    static StageSpec orbit(double angle) { return {Kind::Orbit, 0.0, angle, kTrajectoryLength}; }
    std::string label() const;
};

/// Which side of the alpha boundary the dilation grows.
enum class DilationTarget { Known, Unknown };

struct ExpansionConfig {
    std::vector<StageSpec> schedule = {StageSpec::zoom_out(1.0), StageSpec::orbit(180.0), StageSpec::orbit(-180.0)};
    int keyframes = 6;
    bool refine_enabled = true;
    double refine_t = 0.6;
    int refine_views = 5;
    int refine_iters = 1000;
    int stage_iters = 1000;
    OptimSettings optim;
    LossWeights weights = LossWeights::without_perceptual();
    AlignmentParams align;
    DilationTarget dilation_target = DilationTarget::Unknown;
    RenderSettings render;
    double collision_safety = 0.8;
    /// Reference pixels at or above this alpha count as fully known for median scaling.
    double reference_alpha_min = 0.99;
    /// Minimum fraction of reference pixels that must be fully known.
    double reference_min_coverage = 0.5;
    /// Orbit pivot; the centroid of the initial scene when unset.
    std::optional<Vec3> pivot;
    /// Registered perceptual plug-in; required when weights.w_lpips > 0.
    std::string perceptual;
    std::uint64_t seed = 42;

    void validate() const;
};

struct StageRecord {
    std::string trajectory;
    std::size_t frames_rendered = 0;
    std::size_t points_added = 0;
    std::size_t gaussians_before = 0;
    std::size_t gaussians_after = 0;
    double final_loss = 0.0;
    double wall_seconds = 0.0;
};

struct ExpansionReport {
    std::vector<StageRecord> stages;
    std::optional<StageRecord> refine;
    /// Set when a stage aborted the run.
    std::string error;
    ErrorCode error_code = ErrorCode::Stage;
    bool ok() const { return error.empty(); }
    /// `with_timing` false drops wall times so reports of identical runs compare equal.
    nlohmann::json to_json(bool with_timing = true) const;
};

struct InitResult {
    GaussianScene scene;
    CameraPose reference_pose;
    DepthMap reference_depth; // estimated depth of the input view
};

/// Duplicates the input image, runs stereo on the pair and lifts every valid pixel.
/// `reference_hint` is the pose handed to stereo models that consume pose hints.
InitResult init_scene(const Image& image, DenseStereo& stereo, const CameraIntrinsics& k,
                      const CameraPose& reference_hint = CameraPose::identity());

/// round(k (n - 1) / m) for k = 1..m.
std::vector<int> select_keyframes(int n_frames, int m);

struct IntegrationInputs {
    const Image* reference_image = nullptr;
    CameraPose reference_pose;
};

/// Completed frames of earlier stages, kept as extra supervision for later fits.
struct Supervision {
    std::vector<CameraPose> poses;
    std::vector<Image> images;
    std::size_t size() const { return poses.size(); }
};

/// Adds aligned keyframe geometry to the scene, then fits all completed frames together with `history`.
/// Fills `record` fields other than the trajectory label and wall time.
void integrate(GaussianScene& scene, const std::vector<Image>& completed, const Trajectory& trajectory,
               DenseStereo& stereo, const IntegrationInputs& reference, const ExpansionConfig& config,
               std::uint64_t stage_seed, StageRecord& record, const Supervision* history = nullptr);

/// Viewpoints spaced uniformly over 360 degrees about the pivot, starting at `anchor`.
std::vector<CameraPose> refine_viewpoints(const CameraPose& anchor, const Vec3& pivot, int count);

/// Renders the refine views, refines them at t = refine_t and fits the scene to the results
/// together with `history`. Returns the number of images rendered.
std::size_t refine(GaussianScene& scene, ImageRefiner& refiner, const std::vector<CameraPose>& views,
                   const CameraIntrinsics& k, const ExpansionConfig& config, StageRecord* record = nullptr,
                   const Supervision* history = nullptr);

struct PipelineResult {
    GaussianScene scene;
    ExpansionReport report;
    CameraPose reference_pose;
    CameraPose anchor_pose;
    Vec3 pivot = Vec3::Zero();
};

/// Called after each completed stage (index into the schedule, or the schedule size for refine)
/// with the scene and anchor at that point.
using StageCallback = std::function<void(std::size_t, const StageRecord&, const GaussianScene&, const CameraPose&)>;

/// Runs init_scene, every scheduled stage and the optional refine pass. Zoom-outs start from
/// the current anchor and move it; orbits start from the anchor and leave it in place.
/// Configuration and init errors throw. A failing stage does not: the report carries the
/// stage-tagged error and the scene is the one before that stage.
PipelineResult run_pipeline(const Image& image, const CameraIntrinsics& k, const ExpansionConfig& config,
                            ViewCompleter& completer, DenseStereo& stereo, ImageRefiner* refiner,
                            const CameraPose& reference_hint = CameraPose::identity(),
                            const StageCallback& on_stage = {});

/// Same as run_pipeline starting from an existing scene.
PipelineResult expand_scene(GaussianScene scene, const CameraPose& reference_pose, const Image& reference_image,
                            const CameraIntrinsics& k, const ExpansionConfig& config, ViewCompleter& completer,
                            DenseStereo& stereo, ImageRefiner* refiner, const StageCallback& on_stage = {});

struct TrainingPair {
    std::vector<Image> ground_truth; // x
    std::vector<Image> incomplete;   // y
    std::vector<Image> incomplete_alpha;
};

/// Lifts the start frame's rendered depth into a one-frame partial scene and renders it
/// (y) and the full scene (x) along the trajectory.
TrainingPair make_training_pair(const GaussianScene& world, const Trajectory& trajectory, int start_frame,
                                const RenderSettings& settings = {});

} // namespace scene_forge
