// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "splat.hpp"

#include <algorithm>

#include "error.hpp"

namespace scene_forge {

GaussianScene from_point_cloud(const PointCloud& cloud) {
    if (cloud.positions.size() != cloud.colors.size())
        fail(ErrorCode::Shape, "from_point_cloud: positions and colors differ in length");
    GaussianScene scene;
    const std::size_t n = cloud.size();
    scene.resize(n);
    const float opacity_logit = static_cast<float>(logit(kInitialOpacity));
    const float log_scale = static_cast<float>(std::log(kInitialScale));
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) {
            scene.centers[3 * i + k] = static_cast<float>(cloud.positions[i][k]);
            scene.colors[3 * i + k] = cloud.colors[i][k];
            scene.log_scales[3 * i + k] = log_scale;
        }
        scene.opacity_logits[i] = opacity_logit;
        scene.rotations[4 * i + 0] = 1.0f;
        scene.rotations[4 * i + 1] = 0.0f;
        scene.rotations[4 * i + 2] = 0.0f;
        scene.rotations[4 * i + 3] = 0.0f;
    }
    return scene;
}

void validate_scene(const GaussianScene& scene) {
    const std::size_t n = scene.size();
    if (scene.centers.size() != 3 * n || scene.colors.size() != 3 * n || scene.log_scales.size() != 3 * n ||
        scene.rotations.size() != 4 * n)
        fail(ErrorCode::Invariant, "scene: parameter arrays disagree in length");
    auto finite = [](const std::vector<float>& v) {
        return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
    };
    if (!finite(scene.centers) || !finite(scene.colors) || !finite(scene.opacity_logits) ||
        !finite(scene.log_scales) || !finite(scene.rotations))
        fail(ErrorCode::Invariant, "scene: non-finite parameter");
    for (float c : scene.colors)
        if (c < 0.0f || c > 1.0f) fail(ErrorCode::Invariant, "scene: color outside [0, 1]");
    for (std::size_t i = 0; i < n; ++i) {
        double norm2 = 0.0;
        for (int k = 0; k < 4; ++k) norm2 += double(scene.rotations[4 * i + k]) * scene.rotations[4 * i + k];
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6) fail(ErrorCode::Invariant, "scene: quaternion is not unit length");
    }
}

void project_to_constraints(GaussianScene& scene) {
    for (auto& c : scene.colors) c = std::clamp(c, 0.0f, 1.0f);
    for (std::size_t i = 0; i < scene.size(); ++i) {
        float* q = &scene.rotations[4 * i];
        const double norm = std::sqrt(double(q[0]) * q[0] + double(q[1]) * q[1] + double(q[2]) * q[2] + double(q[3]) * q[3]);
        if (norm < 1e-12) {
            q[0] = 1.0f;
            q[1] = q[2] = q[3] = 0.0f;
            continue;
        }
        for (int k = 0; k < 4; ++k) q[k] = static_cast<float>(q[k] / norm);
    }
}

Vec3 scene_centroid(const GaussianScene& scene) {
    Vec3 sum = Vec3::Zero();
    if (scene.empty()) return sum;
    for (std::size_t i = 0; i < scene.size(); ++i)
        sum += Vec3(scene.centers[3 * i], scene.centers[3 * i + 1], scene.centers[3 * i + 2]);
    return sum / static_cast<double>(scene.size());
}

} // namespace scene_forge
