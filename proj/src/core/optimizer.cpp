// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "random.hpp"

namespace scene_forge {

namespace {

constexpr double kSplitShrink = 1.6;
constexpr double kQuatRenormTolerance = 2e-7;

bool finite_gaussian(const GaussianScene& g, std::size_t i) {
    auto ok = [](const float* p, int n) {
        for (int k = 0; k < n; ++k)
            if (!std::isfinite(p[k])) return false;
        return true;
    };
    return ok(&g.centers[3 * i], 3) && ok(&g.colors[3 * i], 3) && ok(&g.opacity_logits[i], 1) &&
           ok(&g.log_scales[3 * i], 3) && ok(&g.rotations[4 * i], 4);
}

} // namespace

void OptimSettings::validate() const {
    for (double lr : {lr_position, lr_color, lr_opacity, lr_scale, lr_rotation})
        if (!(lr > 0.0)) fail(ErrorCode::Config, "optimizer: learning rates must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        fail(ErrorCode::Config, "optimizer: betas must lie in [0, 1)");
    if (densify_interval < 0) fail(ErrorCode::Config, "optimizer: densify_interval must be >= 0");
    if (!(prune_opacity_threshold >= 0.0 && prune_opacity_threshold < 1.0))
        fail(ErrorCode::Config, "optimizer: prune_opacity_threshold must lie in [0, 1)");
    if (!(split_grad_threshold > 0.0)) fail(ErrorCode::Config, "optimizer: split_grad_threshold must be positive");
}

void AdamState::resize_like(const GaussianScene& scene) {
    m = GaussianScene::zeros_like(scene);
    v = GaussianScene::zeros_like(scene);
}

void adam_step(GaussianScene& scene, const GaussianScene& grads, const OptimSettings& settings, AdamState& state) {
    const std::size_t n = scene.size();
    if (grads.size() != n || grads.centers.size() != scene.centers.size() || grads.rotations.size() != scene.rotations.size())
        fail(ErrorCode::Shape, "adam_step: gradients do not match the scene");
    if (state.m.size() != n) state.resize_like(scene);
    ++state.step;
    const double b1 = settings.beta1, b2 = settings.beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

    auto update = [&](float* p, const float* g, float* m, float* v, int count, double lr) {
        for (int k = 0; k < count; ++k) {
            const double gk = g[k];
            const double mk = b1 * m[k] + (1.0 - b1) * gk;
            const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
            m[k] = static_cast<float>(mk);
            v[k] = static_cast<float>(vk);
            const double delta = lr * (mk / bias1) / (std::sqrt(vk / bias2) + settings.epsilon);
            p[k] = static_cast<float>(p[k] - delta);
        }
    };

    auto all_zero = [](const GaussianScene& g, std::size_t i) {
        for (int k = 0; k < 3; ++k)
            if (g.centers[3 * i + k] != 0.0f || g.colors[3 * i + k] != 0.0f || g.log_scales[3 * i + k] != 0.0f)
                return false;
        for (int k = 0; k < 4; ++k)
            if (g.rotations[4 * i + k] != 0.0f) return false;
        return g.opacity_logits[i] == 0.0f;
    };

    for (std::size_t i = 0; i < n; ++i) {
        // With zero gradient and zero moments the update is exactly zero; skip the arithmetic.
        if (all_zero(grads, i) && all_zero(state.m, i) && all_zero(state.v, i)) continue;
        if (!finite_gaussian(grads, i)) {
            ++state.skipped_nan;
            continue;
        }
        update(&scene.centers[3 * i], &grads.centers[3 * i], &state.m.centers[3 * i], &state.v.centers[3 * i], 3,
               settings.lr_position);
        update(&scene.colors[3 * i], &grads.colors[3 * i], &state.m.colors[3 * i], &state.v.colors[3 * i], 3,
               settings.lr_color);
        update(&scene.opacity_logits[i], &grads.opacity_logits[i], &state.m.opacity_logits[i],
               &state.v.opacity_logits[i], 1, settings.lr_opacity);
        update(&scene.log_scales[3 * i], &grads.log_scales[3 * i], &state.m.log_scales[3 * i],
               &state.v.log_scales[3 * i], 3, settings.lr_scale);
        update(&scene.rotations[4 * i], &grads.rotations[4 * i], &state.m.rotations[4 * i], &state.v.rotations[4 * i],
               4, settings.lr_rotation);

        for (int k = 0; k < 3; ++k) scene.colors[3 * i + k] = std::clamp(scene.colors[3 * i + k], 0.0f, 1.0f);
        float* q = &scene.rotations[4 * i];
        const double norm = std::sqrt(double(q[0]) * q[0] + double(q[1]) * q[1] + double(q[2]) * q[2] + double(q[3]) * q[3]);
        if (std::abs(norm - 1.0) > kQuatRenormTolerance) {
            if (norm < 1e-12) {
                q[0] = 1.0f;
                q[1] = q[2] = q[3] = 0.0f;
            } else {
                for (int k = 0; k < 4; ++k) q[k] = static_cast<float>(q[k] / norm);
            }
        }
    }
}

void DensifyStats::reset(std::size_t n) {
    grad_sum.assign(n, 0.0);
    count.assign(n, 0);
}

void DensifyStats::add(const SceneGradients<float>& grads) {
    if (grad_sum.size() != grads.screen_grad_norm.size()) reset(grads.screen_grad_norm.size());
    for (std::size_t i = 0; i < grad_sum.size(); ++i) {
        if (!grads.visible[i]) continue;
        grad_sum[i] += grads.screen_grad_norm[i];
        ++count[i];
    }
}

DensifyResult densify_and_prune(GaussianScene& scene, const DensifyStats& stats, const OptimSettings& settings,
                                double scene_extent, std::mt19937_64& rng, AdamState* state) {
    const std::size_t n = scene.size();
    if (stats.grad_sum.size() != n || stats.count.size() != n)
        fail(ErrorCode::Shape, "densify_and_prune: statistics are not aligned with the scene");
    const bool carry = state != nullptr && state->m.size() == n;

    enum class Action : std::uint8_t { Keep, Clone, Split, Prune };
    std::vector<Action> action(n, Action::Keep);
    DensifyResult result;
    const double size_limit = settings.percent_dense * scene_extent;
    for (std::size_t i = 0; i < n; ++i) {
        const double opacity = sigmoid(static_cast<double>(scene.opacity_logits[i]));
        if (opacity < settings.prune_opacity_threshold) {
            action[i] = Action::Prune;
            ++result.pruned;
            continue;
        }
        if (stats.count[i] == 0) continue;
        const double avg = stats.grad_sum[i] / stats.count[i];
        if (avg < settings.split_grad_threshold) continue;
        const float max_log = std::max({scene.log_scales[3 * i], scene.log_scales[3 * i + 1], scene.log_scales[3 * i + 2]});
        if (std::exp(double(max_log)) > size_limit) {
            action[i] = Action::Split;
            ++result.split;
        } else {
            action[i] = Action::Clone;
            ++result.cloned;
        }
    }
    if (result.cloned == 0 && result.split == 0 && result.pruned == 0) return result;

    GaussianScene out, out_m, out_v;
    auto keep = [&](std::size_t i) {
        out.push_from(scene, i);
        if (carry) {
            out_m.push_from(state->m, i);
            out_v.push_from(state->v, i);
        }
    };
    auto push_zero_state = [&] {
        if (!carry) return;
        GaussianScene zero;
        zero.resize(1);
        std::fill(zero.rotations.begin(), zero.rotations.end(), 0.0f);
        out_m.append(zero);
        out_v.append(zero);
    };
    for (std::size_t i = 0; i < n; ++i)
        if (action[i] == Action::Keep || action[i] == Action::Clone) keep(i);
    for (std::size_t i = 0; i < n; ++i) {
        if (action[i] != Action::Clone) continue;
        out.push_from(scene, i);
        push_zero_state();
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (action[i] != Action::Split) continue;
        const float* q = &scene.rotations[4 * i];
        const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
        const Mat3 rot = quat.normalized().toRotationMatrix();
        const Vec3 scale(std::exp(double(scene.log_scales[3 * i])), std::exp(double(scene.log_scales[3 * i + 1])),
                         std::exp(double(scene.log_scales[3 * i + 2])));
        const Vec3 center(scene.centers[3 * i], scene.centers[3 * i + 1], scene.centers[3 * i + 2]);
        for (int child = 0; child < 2; ++child) {
            const Vec3 sample(normal(rng), normal(rng), normal(rng));
            const Vec3 c = center + rot * scale.cwiseProduct(sample);
            const std::size_t at = out.size();
            out.push_from(scene, i);
            for (int k = 0; k < 3; ++k) {
                out.centers[3 * at + k] = static_cast<float>(c[k]);
                out.log_scales[3 * at + k] = static_cast<float>(std::log(scale[k] / kSplitShrink));
            }
            push_zero_state();
        }
    }
    scene = std::move(out);
    if (carry) {
        state->m = std::move(out_m);
        state->v = std::move(out_v);
    } else if (state) {
        state->resize_like(scene);
    }
    return result;
}

SceneFitter::SceneFitter(GaussianScene& scene, const CameraIntrinsics& k, OptimSettings settings, LossWeights weights,
                         const PerceptualLoss* perceptual, RenderSettings render, double scene_extent,
                         std::uint64_t seed)
    : scene_(scene), k_(k), settings_(settings), weights_(weights), perceptual_(perceptual), render_(render),
      extent_(scene_extent), view_rng_(substream(seed, "view-sampling")), split_rng_(substream(seed, "split-sampling")) {
    settings_.validate();
    weights_.validate();
    adam_.resize_like(scene_);
    stats_.reset(scene_.size());
}

double SceneFitter::step(const FitView& view) {
    if (view.target == nullptr) fail(ErrorCode::Parameter, "fit: view without a target image");
    if (adam_.m.size() != scene_.size()) adam_.resize_like(scene_);
    const RenderOutput out = rasterizer_.forward(scene_, k_, view.pose, render_);
    const LossValue loss = combined_loss(out.color, *view.target, weights_, perceptual_);
    RenderGradients upstream;
    upstream.color = &loss.gradient;
    const SceneGradients<float> grads = rasterizer_.backward(scene_, upstream);
    stats_.add(grads);
    adam_step(scene_, grads.params, settings_, adam_);
    ++iteration_;

    const auto it = static_cast<int>(iteration_);
    if (settings_.densify_interval > 0 && it % settings_.densify_interval == 0 && it <= settings_.densify_until) {
        const DensifyResult r = densify_and_prune(scene_, stats_, settings_, extent_, split_rng_, &adam_);
        densify_totals_.cloned += r.cloned;
        densify_totals_.split += r.split;
        densify_totals_.pruned += r.pruned;
        stats_.reset(scene_.size());
    }
    return loss.value;
}

double SceneFitter::run(const std::vector<FitView>& views, int iterations) {
    if (views.empty() || iterations <= 0) return 0.0;
    std::vector<std::size_t> order(views.size());
    std::size_t cursor = order.size();
    std::vector<double> last_pass;
    for (int it = 0; it < iterations; ++it) {
        if (cursor == order.size()) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), view_rng_);
            cursor = 0;
            last_pass.clear();
        }
        last_pass.push_back(step(views[order[cursor++]]));
    }
    return std::accumulate(last_pass.begin(), last_pass.end(), 0.0) / static_cast<double>(last_pass.size());
}

} // namespace scene_forge
