// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "expand.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <chrono>
#include <iterator>
#include <cmath>
#include <memory>

#include "random.hpp"

namespace scene_forge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<RenderOutput> render_all(const GaussianScene& scene, const Trajectory& traj, const RenderSettings& rs) {
    std::vector<RenderOutput> out(traj.size());
    tbb::parallel_for(std::size_t{0}, traj.size(),
                      [&](std::size_t i) { out[i] = render(scene, traj.intrinsics, traj.poses[i], rs); });
    return out;
}

// Radius of the camera centers around their mean, the usual 3DGS notion of scene extent.
double camera_extent(const std::vector<CameraPose>& poses) {
    Vec3 mean = Vec3::Zero();
    for (const auto& p : poses) mean += p.center();
    mean /= static_cast<double>(poses.size());
    double r = 0.0;
    for (const auto& p : poses) r = std::max(r, (p.center() - mean).norm());
    return 1.1 * std::max(r, 0.1);
}

std::unique_ptr<PerceptualLoss> perceptual_for(const ExpansionConfig& config) {
    if (config.perceptual.empty()) return nullptr;
    auto p = make_perceptual(config.perceptual);
    if (!p) fail(ErrorCode::Config, "unknown perceptual plug-in '" + config.perceptual + "'", "perceptual");
    return p;
}

double fit(GaussianScene& scene, const std::vector<CameraPose>& poses, const std::vector<Image>& targets,
           const Supervision* history, const CameraIntrinsics& k, const ExpansionConfig& config, int iterations,
           std::uint64_t seed) {
    auto perceptual = perceptual_for(config);
    std::vector<CameraPose> all = poses;
    std::vector<FitView> views;
    for (std::size_t i = 0; i < poses.size(); ++i) views.push_back({poses[i], &targets[i]});
    if (history) {
        all.insert(all.end(), history->poses.begin(), history->poses.end());
        for (std::size_t i = 0; i < history->size(); ++i) views.push_back({history->poses[i], &history->images[i]});
    }
    SceneFitter fitter(scene, k, config.optim, config.weights, perceptual.get(), config.render, camera_extent(all),
                       seed);
    return fitter.run(views, iterations);
}

std::uint64_t stage_seed(std::uint64_t seed, const std::string& name) { return substream(seed, name)(); }

} // namespace

std::string StageSpec::label() const {
    char buf[64];
    if (kind == Kind::ZoomOut) std::snprintf(buf, sizeof buf, "zoom_out(%g)", travel);
    else std::snprintf(buf, sizeof buf, "orbit(%+g)", angle_deg);
    return buf;
}

void ExpansionConfig::validate() const {
    auto bad = [](const std::string& path, const std::string& what) { fail(ErrorCode::Config, path + ": " + what, path); };
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& s = schedule[i];
        const std::string p = "schedule[" + std::to_string(i) + "]";
        if (s.frames < 2) bad(p + ".frames", "must be at least 2");
        if (s.kind == StageSpec::Kind::ZoomOut && !(s.travel > 0.0 && std::isfinite(s.travel)))
            bad(p + ".travel", "must be positive");
        if (s.kind == StageSpec::Kind::Orbit && !(std::abs(s.angle_deg) <= 360.0)) bad(p + ".angle", "must lie in [-360, 360]");
    }
    if (keyframes < 1) bad("keyframes", "must be at least 1");
    for (const auto& s : schedule)
        if (keyframes > s.frames) bad("keyframes", "exceeds the frames of a stage");
    if (!(refine_t > 0.0 && refine_t < 1.0)) bad("refine_t", "must lie in (0, 1)");
    if (refine_views < 1) bad("refine_views", "must be at least 1");
    if (refine_iters < 0) bad("refine_iters", "must be non-negative");
    if (stage_iters < 0) bad("stage_iters", "must be non-negative");
    if (!(collision_safety > 0.0 && collision_safety <= 1.0)) bad("collision_safety", "must lie in (0, 1]");
    if (!(reference_alpha_min > 0.0 && reference_alpha_min <= 1.0)) bad("reference_alpha_min", "must lie in (0, 1]");
    if (!(reference_min_coverage >= 0.0 && reference_min_coverage <= 1.0))
        bad("reference_min_coverage", "must lie in [0, 1]");
    if (pivot && !pivot->allFinite()) bad("pivot", "must be finite");
    if (!(render.screen_blur >= 0.0)) bad("render.screen_blur", "must be non-negative");
    if (!(render.near_plane > 0.0)) bad("render.near_plane", "must be positive");
    auto rethrow = [](const char* prefix, auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            const std::string path = std::string(prefix) + (e.where().empty() ? "" : "." + e.where());
            fail(ErrorCode::Config, std::string(prefix) + ": " + e.what(), path);
        }
    };
    rethrow("optim", [&] { optim.validate(); });
    rethrow("loss", [&] { weights.validate(); });
    rethrow("align", [&] { align.validate(); });
    if (weights.w_lpips > 0.0 && perceptual.empty())
        bad("loss.w_lpips", "a perceptual weight needs a registered plug-in");
}

nlohmann::json ExpansionReport::to_json(bool with_timing) const {
    auto record = [&](const StageRecord& r) {
        nlohmann::json j = {{"trajectory", r.trajectory},     {"frames_rendered", r.frames_rendered},
                            {"points_added", r.points_added}, {"gaussians_before", r.gaussians_before},
                            {"gaussians_after", r.gaussians_after}, {"final_loss", r.final_loss}};
        if (with_timing) j["wall_seconds"] = r.wall_seconds;
        return j;
    };
    nlohmann::json stages_json = nlohmann::json::array();
    for (const auto& s : stages) stages_json.push_back(record(s));
    nlohmann::json out = {{"stages", stages_json}, {"refine", refine ? record(*refine) : nlohmann::json(nullptr)}};
    if (!error.empty()) out["error"] = {{"code", std::string(to_string(error_code))}, {"message", error}};
    return out;
}

InitResult init_scene(const Image& image, DenseStereo& stereo, const CameraIntrinsics& k,
                      const CameraPose& reference_hint) {
    k.validate();
    if (image.width != k.width || image.height != k.height)
        fail(ErrorCode::Shape, "init: image size does not match the intrinsics");
    if (image.channels != 3) fail(ErrorCode::Shape, "init: expected an RGB image");
    const std::vector<Image> pair = {image, image};
    const std::vector<CameraPose> hints = {reference_hint, reference_hint};
    StereoResult est = stereo.estimate(pair, &hints, k);
    if (est.depths.size() != 2 || est.poses.size() != 2)
        fail(ErrorCode::Shape, "init: stereo returned the wrong number of views");

    InitResult out;
    out.reference_pose = est.poses[0];
    out.reference_depth = std::move(est.depths[0]);
    const DepthMap& d = out.reference_depth;
    if (d.width != k.width || d.height != k.height) fail(ErrorCode::Shape, "init: stereo depth size mismatch");
    BinaryMask mask(d.width, d.height);
    for (std::size_t i = 0; i < mask.values.size(); ++i) mask.values[i] = d.valid[i];
    out.scene = from_point_cloud(backproject(d, mask, image, k, out.reference_pose));
    return out;
}

std::vector<int> select_keyframes(int n_frames, int m) {
    if (n_frames < 1) fail(ErrorCode::Parameter, "select_keyframes: n_frames must be positive");
    if (m < 1 || m > n_frames) fail(ErrorCode::Parameter, "select_keyframes: m must lie in [1, n_frames]");
    std::vector<int> idx;
    for (int i = 1; i <= m; ++i)
        idx.push_back(static_cast<int>(std::lround(static_cast<double>(i) * (n_frames - 1) / m)));
    // Rounding can repeat an index when m is close to n_frames; keep them strictly increasing.
    for (std::size_t i = idx.size() - 1; i-- > 0;) idx[i] = std::min(idx[i], idx[i + 1] - 1);
    return idx;
}

void integrate(GaussianScene& scene, const std::vector<Image>& completed, const Trajectory& trajectory,
               DenseStereo& stereo, const IntegrationInputs& reference, const ExpansionConfig& config,
               std::uint64_t seed, StageRecord& record, const Supervision* history) {
    const CameraIntrinsics& k = trajectory.intrinsics;
    if (completed.size() != trajectory.size())
        fail(ErrorCode::Shape, "integrate: completed frames do not match the trajectory");
    if (reference.reference_image == nullptr) fail(ErrorCode::Parameter, "integrate: missing reference image");
    record.gaussians_before = scene.size();

    const std::vector<int> keys = select_keyframes(static_cast<int>(trajectory.size()), config.keyframes);
    std::vector<Image> frames = {*reference.reference_image};
    std::vector<CameraPose> hints = {reference.reference_pose};
    for (int i : keys) {
        frames.push_back(completed[i]);
        hints.push_back(trajectory.poses[i]);
    }
    const StereoResult est = stereo.estimate(frames, &hints, k);
    if (est.depths.size() != frames.size()) fail(ErrorCode::Shape, "integrate: stereo returned the wrong view count");
    for (const auto& d : est.depths)
        if (d.width != k.width || d.height != k.height) fail(ErrorCode::Shape, "integrate: stereo depth size mismatch");

    // Scale from the reference view, restricted to pixels the scene fully covers.
    const RenderOutput ref = render(scene, k, reference.reference_pose, config.render);
    DepthMap ref_est = est.depths[0];
    std::size_t covered = 0;
    for (std::size_t p = 0; p < ref_est.values.size(); ++p) {
        if (ref.alpha.data[p] >= config.reference_alpha_min) ++covered;
        else ref_est.invalidate(p);
    }
    if (static_cast<double>(covered) < config.reference_min_coverage * static_cast<double>(ref_est.pixel_count()))
        fail(ErrorCode::Stage, "integrate: the reference view is not covered by the scene", "reference");
    const double scale = median_scale(ref_est, ref.depth);

    // Keyframes are lifted one at a time so later ones see the points of earlier ones.
    for (std::size_t j = 0; j < keys.size(); ++j) {
        const CameraPose& pose = trajectory.poses[keys[j]];
        const RenderOutput r = render(scene, k, pose, config.render);
        const BinaryMask unknown = config.dilation_target == DilationTarget::Known
                                       ? unknown_region(r.alpha, config.align)
                                       : dilate(mask_from_alpha(r.alpha, config.align.alpha_threshold),
                                                config.align.dilation_iters);
        if (unknown.popcount() == 0) continue;
        const DepthMap aligned = depth_align(est.depths[j + 1], r.depth, unknown, scale, config.align);
        BinaryMask lift = unknown;
        for (std::size_t p = 0; p < lift.values.size(); ++p) lift.values[p] &= aligned.valid[p];
        const PointCloud pc = backproject(aligned, lift, completed[keys[j]], k, pose);
        record.points_added += pc.size();
        scene.append(from_point_cloud(pc));
    }

    record.final_loss = fit(scene, trajectory.poses, completed, history, k, config, config.stage_iters, seed);
    validate_scene(scene);
    record.gaussians_after = scene.size();
}

std::vector<CameraPose> refine_viewpoints(const CameraPose& anchor, const Vec3& pivot, int count) {
    if (count < 1) fail(ErrorCode::Parameter, "refine_viewpoints: count must be positive");
    if (count == 1) return {anchor};
    const Trajectory t = plan_orbit(anchor, pivot, 360.0 * (count - 1) / count, count, CameraIntrinsics{});
    return t.poses;
}

std::size_t refine(GaussianScene& scene, ImageRefiner& refiner, const std::vector<CameraPose>& views,
                   const CameraIntrinsics& k, const ExpansionConfig& config, StageRecord* record,
                   const Supervision* history) {
    if (!config.refine_enabled) return 0;
    const auto t0 = Clock::now();
    const std::size_t before = scene.size();
    std::vector<Image> targets(views.size());
    tbb::parallel_for(std::size_t{0}, views.size(),
                      [&](std::size_t i) { targets[i] = render(scene, k, views[i], config.render).color; });
    for (auto& img : targets) img = refiner.refine(img, config.refine_t);
    const double loss =
        fit(scene, views, targets, history, k, config, config.refine_iters, stage_seed(config.seed, "refine"));
    validate_scene(scene);
    if (record) {
        record->trajectory = "refine";
        record->frames_rendered = views.size();
        record->gaussians_before = before;
        record->gaussians_after = scene.size();
        record->final_loss = loss;
        record->wall_seconds = seconds_since(t0);
    }
    return views.size();
}

PipelineResult expand_scene(GaussianScene scene, const CameraPose& reference_pose, const Image& reference_image,
                            const CameraIntrinsics& k, const ExpansionConfig& config, ViewCompleter& completer,
                            DenseStereo& stereo, ImageRefiner* refiner, const StageCallback& on_stage) {
    config.validate();
    k.validate();
    if (config.refine_enabled && refiner == nullptr)
        fail(ErrorCode::Config, "refine is enabled but no refiner is configured", "refine");
    if (reference_image.width != k.width || reference_image.height != k.height)
        fail(ErrorCode::Shape, "expand: reference image size does not match the intrinsics");

    PipelineResult out;
    out.reference_pose = reference_pose;
    out.anchor_pose = reference_pose;
    out.pivot = config.pivot ? *config.pivot : scene_centroid(scene);
    out.scene = std::move(scene);
    const IntegrationInputs ref{&reference_image, reference_pose};
    // Every fit also sees the completed frames of all earlier stages, so later stages cannot overwrite them.
    Supervision history;

    for (std::size_t i = 0; i < config.schedule.size(); ++i) {
        const StageSpec& spec = config.schedule[i];
        const auto t0 = Clock::now();
        StageRecord record;
        record.trajectory = spec.label();
        GaussianScene working = out.scene;
        try {
            Trajectory traj;
            if (spec.kind == StageSpec::Kind::ZoomOut) {
                const RenderOutput r = render(working, k, out.anchor_pose, config.render);
                const double travel = std::min(spec.travel, collision_bound(r.depth, config.collision_safety));
                traj = plan_zoom_out(out.anchor_pose, travel, spec.frames, k);
            } else {
                traj = plan_orbit(out.anchor_pose, out.pivot, spec.angle_deg, spec.frames, k);
            }
            const std::vector<RenderOutput> renders = render_all(working, traj, config.render);
            std::vector<Image> frames, alphas;
            for (const auto& r : renders) {
                frames.push_back(r.color);
                alphas.push_back(r.alpha);
            }
            std::vector<Image> completed = completer.complete(frames, alphas, traj);
            if (completed.size() != traj.size()) fail(ErrorCode::Shape, "completer returned the wrong frame count");
            for (const auto& c : completed)
                if (c.width != k.width || c.height != k.height || c.channels != 3)
                    fail(ErrorCode::Shape, "completer returned a frame of the wrong size");
            record.frames_rendered = traj.size();
            integrate(working, completed, traj, stereo, ref, config,
                      stage_seed(config.seed, "stage-" + std::to_string(i)), record, &history);
            out.scene = std::move(working);
            history.poses.insert(history.poses.end(), traj.poses.begin(), traj.poses.end());
            history.images.insert(history.images.end(), std::make_move_iterator(completed.begin()),
                                  std::make_move_iterator(completed.end()));
            if (spec.kind == StageSpec::Kind::ZoomOut) out.anchor_pose = traj.poses.back();
        } catch (const Error& e) {
            out.report.error = "stage " + std::to_string(i) + " " + spec.label() + ": " + e.what();
            out.report.error_code = e.code();
            record.wall_seconds = seconds_since(t0);
            out.report.stages.push_back(record);
            return out;
        }
        record.wall_seconds = seconds_since(t0);
        out.report.stages.push_back(record);
        if (on_stage) on_stage(i, record, out.scene, out.anchor_pose);
    }

    // Nothing was expanded, so there is nothing to refine.
    if (config.refine_enabled && !config.schedule.empty()) {
        GaussianScene working = out.scene;
        StageRecord record;
        try {
            refine(working, *refiner, refine_viewpoints(out.anchor_pose, out.pivot, config.refine_views), k, config,
                   &record, &history);
            out.scene = std::move(working);
            if (on_stage) on_stage(config.schedule.size(), record, out.scene, out.anchor_pose);
        } catch (const Error& e) {
            out.report.error = std::string("refine: ") + e.what();
            out.report.error_code = e.code();
        }
        out.report.refine = record;
    }
    return out;
}

PipelineResult run_pipeline(const Image& image, const CameraIntrinsics& k, const ExpansionConfig& config,
                            ViewCompleter& completer, DenseStereo& stereo, ImageRefiner* refiner,
                            const CameraPose& reference_hint, const StageCallback& on_stage) {
    config.validate();
    InitResult init = init_scene(image, stereo, k, reference_hint);
    return expand_scene(std::move(init.scene), init.reference_pose, image, k, config, completer, stereo, refiner,
                        on_stage);
}

TrainingPair make_training_pair(const GaussianScene& world, const Trajectory& trajectory, int start_frame,
                                const RenderSettings& settings) {
    if (start_frame < 0 || static_cast<std::size_t>(start_frame) >= trajectory.size())
        fail(ErrorCode::Parameter, "make_training_pair: start frame out of range");
    const CameraIntrinsics& k = trajectory.intrinsics;
    const CameraPose& start = trajectory.poses[start_frame];
    const RenderOutput first = render(world, k, start, settings);
    BinaryMask mask(k.width, k.height);
    for (std::size_t i = 0; i < mask.values.size(); ++i) mask.values[i] = first.depth.valid[i];
    const GaussianScene partial = from_point_cloud(backproject(first.depth, mask, first.color, k, start));

    TrainingPair pair;
    const std::vector<RenderOutput> full = render_all(world, trajectory, settings);
    const std::vector<RenderOutput> part = render_all(partial, trajectory, settings);
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        pair.ground_truth.push_back(full[i].color);
        pair.incomplete.push_back(part[i].color);
        pair.incomplete_alpha.push_back(part[i].alpha);
    }
    return pair;
}

} // namespace scene_forge
