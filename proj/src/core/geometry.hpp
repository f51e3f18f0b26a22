// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

#include "image.hpp"

namespace scene_forge {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Color3 = Eigen::Vector3f;

/// Pinhole intrinsics. Pixel (u, v) is (column, row) with centers at integer coordinates.
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    /// Throws ErrorCode::Parameter when a field is out of range.
    void validate() const;
    bool operator==(const CameraIntrinsics&) const = default;
};

/// World-to-camera rigid transform: x_cam = rotation * x_world + translation.
struct CameraPose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static CameraPose identity() { return {}; }
    /// Pose of a camera centered at `center` with camera-to-world rotation `cam_to_world`.
    static CameraPose from_center(const Mat3& cam_to_world, const Vec3& center);

    Vec3 center() const { return -rotation.transpose() * translation; }
    Vec3 apply(const Vec3& world) const { return rotation * world + translation; }

    /// Largest |R^T R - I| entry.
    double orthonormality_error() const;
    void validate() const;
    bool operator==(const CameraPose& o) const {
        return rotation == o.rotation && translation == o.translation;
    }
};

/// a ∘ b: apply b, then a.
CameraPose compose(const CameraPose& a, const CameraPose& b);
CameraPose invert(const CameraPose& a);
/// Maps camera-a coordinates to camera-b coordinates.
CameraPose relative(const CameraPose& a, const CameraPose& b);
/// Projects the rotation back onto SO(3) (polar decomposition).
Mat3 orthonormalize(const Mat3& r);

struct Projection {
    Vec2 pixel = Vec2::Zero();
    double depth = 0.0;
    bool in_front = false;
};

Projection project(const Vec3& point, const CameraIntrinsics& k, const CameraPose& pose);

/// Lifts pixel (u, v) at camera-space depth z to world space.
Vec3 unproject(double u, double v, double z, const CameraIntrinsics& k, const CameraPose& pose);

struct PointCloud {
    std::vector<Vec3> positions;
    std::vector<Color3> colors;

    std::size_t size() const { return positions.size(); }
    bool empty() const { return positions.empty(); }
    void append(const PointCloud& other);
};

/// One point per pixel with mask != 0. Colors are clamped to [0, 1].
PointCloud backproject(const DepthMap& depth, const BinaryMask& mask, const Image& colors,
                       const CameraIntrinsics& k, const CameraPose& pose);

} // namespace scene_forge
