// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "loss.hpp"
#include "rasterizer.hpp"
#include "splat.hpp"

namespace scene_forge {

struct OptimSettings {
    double lr_position = 1e-5;
    double lr_color = 5e-3;
    double lr_opacity = 5e-2;
    double lr_scale = 5e-4;
    double lr_rotation = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-15;
    /// 0 disables densification.
    int densify_interval = 100;
    /// Last iteration (inclusive) at which densification may run.
    int densify_until = 500;
    double prune_opacity_threshold = 5e-3;
    double split_grad_threshold = 2e-4;
    /// Gaussians whose largest scale exceeds this fraction of the scene extent are split, not cloned.
    double percent_dense = 0.01;

    void validate() const;
};

struct AdamState {
    GaussianScene m;
    GaussianScene v;
    std::uint64_t step = 0;
    std::size_t skipped_nan = 0;

    void resize_like(const GaussianScene& scene);
};

/// One Adam update of all parameter groups in their unconstrained form. Gaussians with a
/// non-finite gradient entry are left untouched. Quaternions are re-normalized afterwards.
void adam_step(GaussianScene& scene, const GaussianScene& grads, const OptimSettings& settings, AdamState& state);

/// Running mean of screen-space center-gradient norms for each Gaussian.
struct DensifyStats {
    std::vector<double> grad_sum;
    std::vector<std::uint32_t> count;

    void reset(std::size_t n);
    void add(const SceneGradients<float>& grads);
};

struct DensifyResult {
    std::size_t cloned = 0;
    std::size_t split = 0;
    std::size_t pruned = 0;
};

/// Clones small high-gradient Gaussians, splits large ones into two children (scale / 1.6,
/// centers drawn from the parent), and prunes opacity below the threshold. Opacities are never
/// reset. `state`, when given, is re-aligned with the new Gaussian order.
DensifyResult densify_and_prune(GaussianScene& scene, const DensifyStats& stats, const OptimSettings& settings,
                                double scene_extent, std::mt19937_64& rng, AdamState* state = nullptr);

struct FitView {
    CameraPose pose;
    const Image* target = nullptr;
};

/// Gradient-descent scene fitting against posed images.
class SceneFitter {
public:
    SceneFitter(GaussianScene& scene, const CameraIntrinsics& k, OptimSettings settings, LossWeights weights,
                const PerceptualLoss* perceptual, RenderSettings render, double scene_extent, std::uint64_t seed);

    /// One optimization step on one view; returns the loss before the update.
    double step(const FitView& view);

    /// `iterations` steps over views drawn from shuffled passes. Returns the mean loss of the
    /// last (possibly partial) pass.
    double run(const std::vector<FitView>& views, int iterations);

    const AdamState& adam() const { return adam_; }
    std::size_t iteration() const { return iteration_; }
    const DensifyResult& densify_totals() const { return densify_totals_; }

private:
    GaussianScene& scene_;
    CameraIntrinsics k_;
    OptimSettings settings_;
    LossWeights weights_;
    const PerceptualLoss* perceptual_;
    RenderSettings render_;
    double extent_;
    std::mt19937_64 view_rng_;
    std::mt19937_64 split_rng_;
    Rasterizer<float> rasterizer_;
    AdamState adam_;
    DensifyStats stats_;
    DensifyResult densify_totals_;
    std::size_t iteration_ = 0;
};

} // namespace scene_forge
