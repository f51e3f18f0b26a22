// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "geometry.hpp"

namespace scene_forge {

inline constexpr int kTrajectoryLength = 49;

struct Trajectory {
    std::vector<CameraPose> poses;
    CameraIntrinsics intrinsics;

    std::size_t size() const { return poses.size(); }
};

enum class PositionMode { Linear, CubicSpline };

/// World "up" for orbits. Cameras follow the x-right, y-down, z-forward convention.
inline Vec3 world_up() { return Vec3(0.0, -1.0, 0.0); }

/// Constant-speed geodesic interpolation between two rotations.
Mat3 slerp(const Mat3& from, const Mat3& to, double t);

/// Interpolates camera centers (linearly, or with a natural cubic spline through `waypoints`)
/// and slerps orientations. Frames 0 and n-1 are copies of `start` and `end`.
Trajectory interpolate(const CameraPose& start, const CameraPose& end, int n, PositionMode mode,
                       const CameraIntrinsics& intrinsics, const std::vector<Vec3>& waypoints = {});

/// Moves the camera backward along its viewing axis by `travel`, orientation fixed.
Trajectory plan_zoom_out(const CameraPose& start, double travel, int n, const CameraIntrinsics& intrinsics);

/// Revolves the camera about the vertical axis through `pivot`. Positive angles turn left.
Trajectory plan_orbit(const CameraPose& start, const Vec3& pivot, double total_angle_deg, int n,
                      const CameraIntrinsics& intrinsics);

/// safety * (minimum valid depth).
double collision_bound(const DepthMap& depth, double safety);

} // namespace scene_forge
