// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "geometry.hpp"

namespace scene_forge {

/// Structure-of-arrays Gaussian parameters in their unconstrained form.
/// Colors are direct RGB, opacity is stored as a logit, scales as logarithms,
/// rotations as (w, x, y, z) quaternions. The same layout holds gradients.
template <typename T>
struct GaussianParams {
    std::vector<T> centers;        // 3N
    std::vector<T> colors;         // 3N
    std::vector<T> opacity_logits; // N
    std::vector<T> log_scales;     // 3N
    std::vector<T> rotations;      // 4N

    std::size_t size() const { return opacity_logits.size(); }
    bool empty() const { return opacity_logits.empty(); }

    void resize(std::size_t n) {
        centers.resize(3 * n);
        colors.resize(3 * n);
        opacity_logits.resize(n);
        log_scales.resize(3 * n);
        rotations.resize(4 * n);
    }

    static GaussianParams zeros_like(const GaussianParams& other) {
        GaussianParams out;
        out.centers.assign(other.centers.size(), T(0));
        out.colors.assign(other.colors.size(), T(0));
        out.opacity_logits.assign(other.opacity_logits.size(), T(0));
        out.log_scales.assign(other.log_scales.size(), T(0));
        out.rotations.assign(other.rotations.size(), T(0));
        return out;
    }

    /// Appends Gaussian `i` of `src`.
    void push_from(const GaussianParams& src, std::size_t i) {
        for (int k = 0; k < 3; ++k) {
            centers.push_back(src.centers[3 * i + k]);
            colors.push_back(src.colors[3 * i + k]);
            log_scales.push_back(src.log_scales[3 * i + k]);
        }
        opacity_logits.push_back(src.opacity_logits[i]);
        for (int k = 0; k < 4; ++k) rotations.push_back(src.rotations[4 * i + k]);
    }

    void append(const GaussianParams& other) {
        centers.insert(centers.end(), other.centers.begin(), other.centers.end());
        colors.insert(colors.end(), other.colors.begin(), other.colors.end());
        opacity_logits.insert(opacity_logits.end(), other.opacity_logits.begin(), other.opacity_logits.end());
        log_scales.insert(log_scales.end(), other.log_scales.begin(), other.log_scales.end());
        rotations.insert(rotations.end(), other.rotations.begin(), other.rotations.end());
    }

    /// Calls f(span-like vector&) for each of the five parameter groups.
    template <typename F>
    void for_each_group(F&& f) {
        f(centers);
        f(colors);
        f(opacity_logits);
        f(log_scales);
        f(rotations);
    }

    template <typename U>
    GaussianParams<U> cast() const {
        GaussianParams<U> out;
        auto conv = [](const std::vector<T>& in, std::vector<U>& o) { o.assign(in.begin(), in.end()); };
        conv(centers, out.centers);
        conv(colors, out.colors);
        conv(opacity_logits, out.opacity_logits);
        conv(log_scales, out.log_scales);
        conv(rotations, out.rotations);
        return out;
    }

    bool operator==(const GaussianParams&) const = default;
};

using GaussianScene = GaussianParams<float>;

inline constexpr double kInitialScale = 3e-4;
inline constexpr double kInitialOpacity = 0.8;

template <typename T>
inline T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// One Gaussian per point: isotropic scale 3e-4, opacity 0.8, identity rotation.
GaussianScene from_point_cloud(const PointCloud& cloud);

/// Throws ErrorCode::Invariant when a parameter is non-finite, a color leaves [0, 1],
/// or a quaternion is not unit length within 1e-6.
void validate_scene(const GaussianScene& scene);

/// Re-normalizes quaternions and clamps colors into [0, 1].
void project_to_constraints(GaussianScene& scene);

/// Mean of the Gaussian centers.
Vec3 scene_centroid(const GaussianScene& scene);

} // namespace scene_forge
