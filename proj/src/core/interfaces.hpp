// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rasterizer.hpp"
#include "splat.hpp"
#include "trajectory.hpp"

namespace scene_forge {

/// Maps an incomplete rendered video (plus its alpha maps) to a completed one.
class ViewCompleter {
public:
    virtual ~ViewCompleter() = default;
    virtual std::vector<Image> complete(const std::vector<Image>& frames, const std::vector<Image>& alphas,
                                        const Trajectory& trajectory) = 0;
};

struct StereoResult {
    std::vector<DepthMap> depths;
    std::vector<CameraPose> poses;
};

/// Dense stereo over a frame set. `pose_hints`, when non-null, carries the poses the caller
/// associates with each frame; learned models may ignore it.
class DenseStereo {
public:
    virtual ~DenseStereo() = default;
    virtual StereoResult estimate(const std::vector<Image>& frames, const std::vector<CameraPose>* pose_hints,
                                  const CameraIntrinsics& k) = 0;
};

/// Image-to-image refinement at diffusion time t in [0, 1] (fraction of the full schedule).
class ImageRefiner {
public:
    virtual ~ImageRefiner() = default;
    Image refine(const Image& image, double t);
    std::vector<double> recorded_t() const;

protected:
    virtual Image do_refine(const Image& image, double t) = 0;

private:
    mutable std::mutex mutex_;
    std::vector<double> recorded_t_;
};

struct WorldSpec {
    std::uint64_t seed = 42;
    double room_size = 5.0;
    int box_count = 4;
    std::size_t target_gaussians = 20000;
};

/// Procedural ground-truth scene: a closed cube room with checkerboard walls and textured boxes.
struct SyntheticWorld {
    WorldSpec spec;
    GaussianScene scene;

    /// Camera pose inside the room used as the default input view.
    static CameraPose default_reference_pose();
};

SyntheticWorld make_synthetic_world(const WorldSpec& spec = {});

/// Renders the ground-truth world along the trajectory, ignoring the incomplete input.
std::unique_ptr<ViewCompleter> oracle_completer(std::shared_ptr<const SyntheticWorld> world,
                                                RenderSettings settings = {});

struct StereoCorruption {
    double scale = 1.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Ground-truth depths and poses for the hinted views, optionally scaled and noised.
std::unique_ptr<DenseStereo> oracle_stereo(std::shared_ptr<const SyntheticWorld> world,
                                           StereoCorruption corruption = {}, RenderSettings settings = {});

std::unique_ptr<ImageRefiner> identity_refiner();
/// Mass-preserving Gaussian blur of the given sigma (pixels).
std::unique_ptr<ImageRefiner> blur_refiner(double sigma);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
};

/// Client of the POST /v1/complete wire protocol.
std::unique_ptr<ViewCompleter> remote_completer(const std::string& endpoint, double timeout_seconds,
                                                RetryPolicy retry = {});

} // namespace scene_forge
