// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace scene_forge {

namespace {
constexpr double kPoseTolerance = 1e-6;
constexpr double kDriftLimit = 1e-9;
} // namespace

void CameraIntrinsics::validate() const {
    if (width <= 0 || height <= 0) fail(ErrorCode::Parameter, "intrinsics: width and height must be positive");
    if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorCode::Parameter, "intrinsics: focal lengths must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        fail(ErrorCode::Parameter, "intrinsics: principal point outside the image");
}

CameraPose CameraPose::from_center(const Mat3& cam_to_world, const Vec3& center) {
    CameraPose pose;
    pose.rotation = cam_to_world.transpose();
    pose.translation = -pose.rotation * center;
    return pose;
}

double CameraPose::orthonormality_error() const {
    return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
}

void CameraPose::validate() const {
    if (!rotation.allFinite() || !translation.allFinite()) fail(ErrorCode::Parameter, "pose: non-finite entries");
    if (orthonormality_error() > kPoseTolerance || std::abs(rotation.determinant() - 1.0) > kPoseTolerance)
        fail(ErrorCode::Parameter, "pose: rotation is not orthonormal");
}

Mat3 orthonormalize(const Mat3& r) {
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    Mat3 out = u * svd.matrixV().transpose();
    if (out.determinant() < 0.0) {
        u.col(2) = -u.col(2);
        out = u * svd.matrixV().transpose();
    }
    return out;
}

CameraPose compose(const CameraPose& a, const CameraPose& b) {
    CameraPose out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    if (out.orthonormality_error() > kDriftLimit) out.rotation = orthonormalize(out.rotation);
    return out;
}

CameraPose invert(const CameraPose& a) {
    CameraPose out;
    out.rotation = a.rotation.transpose();
    out.translation = -(out.rotation * a.translation);
    return out;
}

CameraPose relative(const CameraPose& a, const CameraPose& b) { return compose(b, invert(a)); }

Projection project(const Vec3& point, const CameraIntrinsics& k, const CameraPose& pose) {
    Projection out;
    const Vec3 cam = pose.apply(point);
    out.depth = cam.z();
    out.in_front = cam.z() > 0.0;
    if (out.in_front) out.pixel = Vec2(k.fx * cam.x() / cam.z() + k.cx, k.fy * cam.y() / cam.z() + k.cy);
    return out;
}

Vec3 unproject(double u, double v, double z, const CameraIntrinsics& k, const CameraPose& pose) {
    const Vec3 cam((u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z);
    return pose.rotation.transpose() * (cam - pose.translation);
}

void PointCloud::append(const PointCloud& other) {
    positions.insert(positions.end(), other.positions.begin(), other.positions.end());
    colors.insert(colors.end(), other.colors.begin(), other.colors.end());
}

PointCloud backproject(const DepthMap& depth, const BinaryMask& mask, const Image& colors,
                       const CameraIntrinsics& k, const CameraPose& pose) {
    if (depth.width != mask.width || depth.height != mask.height || depth.width != colors.width ||
        depth.height != colors.height || colors.channels != 3)
        fail(ErrorCode::Shape, "backproject: depth, mask and colors must share dimensions");
    if (!(k.fx != 0.0) || !(k.fy != 0.0) || !std::isfinite(k.fx) || !std::isfinite(k.fy))
        fail(ErrorCode::Parameter, "backproject: intrinsics are not invertible");

    PointCloud cloud;
    const std::size_t count = mask.popcount();
    cloud.positions.reserve(count);
    cloud.colors.reserve(count);
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            const std::size_t i = depth.index(u, v);
            if (!mask.values[i]) continue;
            if (!depth.valid[i]) fail(ErrorCode::Parameter, "backproject: mask selects an invalid depth pixel");
            cloud.positions.push_back(unproject(u, v, depth.values[i], k, pose));
            Color3 c;
            for (int ch = 0; ch < 3; ++ch) c[ch] = std::clamp(colors.at(u, v, ch), 0.0f, 1.0f);
            cloud.colors.push_back(c);
        }
    }
    return cloud;
}

} // namespace scene_forge
