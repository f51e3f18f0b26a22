// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "image.hpp"

namespace scene_forge {

struct LossValue {
    double value = 0.0;
    Image gradient; // d value / d pred
};

struct LossWeights {
    double w_l1 = 0.8;
    double w_ssim = 0.2;
    double w_lpips = 0.3;

    /// The perceptual term disabled; what a pipeline runs with when no plug-in is registered.
    static LossWeights without_perceptual() { return {0.8, 0.2, 0.0}; }
    void validate() const;
};

/// Mean absolute error; subgradient sign(pred - target) / count, zero at ties.
LossValue l1_loss(const Image& pred, const Image& target);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2, C2 = 0.03^2.
/// Windows are renormalized at the image border.
double ssim(const Image& pred, const Image& target);

/// 1 - ssim(pred, target) with its analytic gradient.
LossValue ssim_loss(const Image& pred, const Image& target);

/// Pluggable perceptual term: (pred, target) -> (value, d value / d pred).
class PerceptualLoss {
public:
    virtual ~PerceptualLoss() = default;
    virtual LossValue evaluate(const Image& pred, const Image& target) const = 0;
};

using PerceptualFactory = std::function<std::unique_ptr<PerceptualLoss>()>;
void register_perceptual(const std::string& name, PerceptualFactory factory);
/// nullptr when no plug-in of that name exists.
std::unique_ptr<PerceptualLoss> make_perceptual(const std::string& name);
std::vector<std::string> registered_perceptual();

/// w_l1 * L1 + w_ssim * (1 - SSIM) + w_lpips * perceptual. Throws ErrorCode::Config when
/// w_lpips > 0 without a plug-in.
LossValue combined_loss(const Image& pred, const Image& target, const LossWeights& weights,
                        const PerceptualLoss* perceptual = nullptr);

} // namespace scene_forge
