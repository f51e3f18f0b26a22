// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "error.hpp"

namespace scene_forge {

namespace {

constexpr double kAntipodalDot = 1e-12;

Eigen::Quaterniond to_quat(const Mat3& r) { return Eigen::Quaterniond(r).normalized(); }

// Picks the sign of `q1` used for interpolation out of `q0`.
Eigen::Quaterniond same_hemisphere(const Eigen::Quaterniond& q0, Eigen::Quaterniond q1) {
    const double dot = q0.dot(q1);
    if (std::abs(dot) <= kAntipodalDot) {
        // Half-turn: the sign decides the direction of travel. Fix it by the relative axis.
        const Eigen::Quaterniond rel = q0.conjugate() * q1;
        Eigen::Index largest = 0;
        rel.vec().cwiseAbs().maxCoeff(&largest);
        if (rel.vec()[largest] < 0.0) q1.coeffs() = -q1.coeffs();
    } else if (dot < 0.0) {
        q1.coeffs() = -q1.coeffs();
    }
    return q1;
}

Eigen::Quaterniond slerp_quat(const Eigen::Quaterniond& q0, const Eigen::Quaterniond& q1, double t) {
    const double dot = std::clamp(q0.dot(q1), -1.0, 1.0);
    const double theta = std::acos(dot);
    Eigen::Quaterniond out;
    if (theta < 1e-9) {
        out.coeffs() = (1.0 - t) * q0.coeffs() + t * q1.coeffs();
    } else {
        const double s = std::sin(theta);
        out.coeffs() = (std::sin((1.0 - t) * theta) / s) * q0.coeffs() + (std::sin(t * theta) / s) * q1.coeffs();
    }
    return out.normalized();
}

CameraPose pose_at(const Mat3& world_to_cam, const Vec3& center) {
    CameraPose p;
    p.rotation = world_to_cam;
    p.translation = -(world_to_cam * center);
    return p;
}

// Natural cubic spline through uniformly parameterized knots on [0, 1], one coordinate.
class NaturalSpline {
public:
    explicit NaturalSpline(std::vector<double> knots) : y_(std::move(knots)), m_(y_.size(), 0.0) {
        const std::size_t n = y_.size();
        if (n < 3) return;
        h_ = 1.0 / static_cast<double>(n - 1);
        // Tridiagonal system for interior second derivatives (Thomas algorithm).
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double rhs = 6.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (h_ * h_);
            const double denom = 4.0 - (i > 1 ? c[i - 1] : 0.0);
            c[i] = 1.0 / denom;
            d[i] = (rhs - (i > 1 ? d[i - 1] : 0.0)) / denom;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = d[i] - c[i] * m_[i + 1];
            if (i == 1) break;
        }
    }

    double operator()(double t) const {
        const std::size_t n = y_.size();
        if (n == 2) return y_[0] + t * (y_[1] - y_[0]);
        std::size_t seg = std::min(static_cast<std::size_t>(t / h_), n - 2);
        const double a = (static_cast<double>(seg + 1) * h_ - t) / h_;
        const double b = 1.0 - a;
        return a * y_[seg] + b * y_[seg + 1] + ((a * a * a - a) * m_[seg] + (b * b * b - b) * m_[seg + 1]) * h_ * h_ / 6.0;
    }

private:
    std::vector<double> y_;
    std::vector<double> m_;
    double h_ = 1.0;
};

void require_count(int n) {
    if (n < 2) fail(ErrorCode::Parameter, "trajectory: frame count must be at least 2");
}

} // namespace

Mat3 slerp(const Mat3& from, const Mat3& to, double t) {
    const Eigen::Quaterniond q0 = to_quat(from);
    const Eigen::Quaterniond q1 = same_hemisphere(q0, to_quat(to));
    return slerp_quat(q0, q1, t).toRotationMatrix();
}

Trajectory interpolate(const CameraPose& start, const CameraPose& end, int n, PositionMode mode,
                       const CameraIntrinsics& intrinsics, const std::vector<Vec3>& waypoints) {
    require_count(n);
    Trajectory traj;
    traj.intrinsics = intrinsics;
    traj.poses.reserve(static_cast<std::size_t>(n));

    std::vector<Vec3> knots{start.center()};
    if (mode == PositionMode::CubicSpline) knots.insert(knots.end(), waypoints.begin(), waypoints.end());
    knots.push_back(end.center());
    std::vector<NaturalSpline> splines;
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<double> coord;
        for (const auto& k : knots) coord.push_back(k[axis]);
        splines.emplace_back(std::move(coord));
    }

    const Eigen::Quaterniond q0 = to_quat(start.rotation);
    const Eigen::Quaterniond q1 = same_hemisphere(q0, to_quat(end.rotation));
    for (int k = 0; k < n; ++k) {
        if (k == 0) {
            traj.poses.push_back(start);
            continue;
        }
        if (k == n - 1) {
            traj.poses.push_back(end);
            continue;
        }
        const double t = static_cast<double>(k) / static_cast<double>(n - 1);
        const Vec3 center(splines[0](t), splines[1](t), splines[2](t));
        traj.poses.push_back(pose_at(slerp_quat(q0, q1, t).toRotationMatrix(), center));
    }
    return traj;
}

Trajectory plan_zoom_out(const CameraPose& start, double travel, int n, const CameraIntrinsics& intrinsics) {
    require_count(n);
    if (!(travel > 0.0)) fail(ErrorCode::Parameter, "zoom_out: travel must be positive");
    Trajectory traj;
    traj.intrinsics = intrinsics;
    const Vec3 c0 = start.center();
    const Vec3 forward = start.rotation.transpose() * Vec3::UnitZ();
    for (int k = 0; k < n; ++k) {
        if (k == 0) {
            traj.poses.push_back(start);
            continue;
        }
        const double t = static_cast<double>(k) / static_cast<double>(n - 1);
        traj.poses.push_back(pose_at(start.rotation, c0 - (t * travel) * forward));
    }
    return traj;
}

Trajectory plan_orbit(const CameraPose& start, const Vec3& pivot, double total_angle_deg, int n,
                      const CameraIntrinsics& intrinsics) {
    require_count(n);
    if (!pivot.allFinite()) fail(ErrorCode::Parameter, "orbit: pivot must be finite");
    if (!(std::abs(total_angle_deg) <= 360.0)) fail(ErrorCode::Parameter, "orbit: |angle| must not exceed 360 degrees");
    const Vec3 offset = start.center() - pivot;
    if (offset.norm() < 1e-9) fail(ErrorCode::Parameter, "orbit: camera center coincides with pivot");

    Trajectory traj;
    traj.intrinsics = intrinsics;
    const double total = total_angle_deg * std::numbers::pi / 180.0;
    for (int k = 0; k < n; ++k) {
        if (k == 0) {
            traj.poses.push_back(start);
            continue;
        }
        const double angle = total * static_cast<double>(k) / static_cast<double>(n - 1);
        const Mat3 turn = Eigen::AngleAxisd(angle, world_up()).toRotationMatrix();
        traj.poses.push_back(pose_at(start.rotation * turn.transpose(), pivot + turn * offset));
    }
    return traj;
}

double collision_bound(const DepthMap& depth, double safety) {
    if (!(safety > 0.0 && safety <= 1.0)) fail(ErrorCode::Parameter, "collision_bound: safety must lie in (0, 1]");
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < depth.values.size(); ++i)
        if (depth.valid[i]) lowest = std::min(lowest, static_cast<double>(depth.values[i]));
    if (!std::isfinite(lowest)) fail(ErrorCode::EmptyInput, "collision_bound: depth map has no valid pixels");
    return safety * lowest;
}

} // namespace scene_forge
