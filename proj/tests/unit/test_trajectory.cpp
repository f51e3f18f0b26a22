// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "trajectory.hpp"

using namespace scene_forge;

namespace {

const CameraIntrinsics kK{100, 100, 32, 24, 64, 48};
constexpr double kDeg = std::numbers::pi / 180.0;

double angle_between(const Mat3& a, const Mat3& b) {
    return Eigen::AngleAxisd(a.transpose() * b).angle();
}

Mat3 rot_z(double rad) { return Eigen::AngleAxisd(rad, Vec3::UnitZ()).toRotationMatrix(); }

} // namespace

TEST_CASE("slerp of equal endpoints is constant") {
    const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    for (double t : {0.0, 0.3, 1.0}) CHECK((slerp(r, r, t) - r).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("slerp geodesic midpoint") {
    const Mat3 mid = slerp(Mat3::Identity(), rot_z(90 * kDeg), 0.5);
    CHECK((mid - rot_z(45 * kDeg)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("slerp at exactly pi is deterministic") {
    const Mat3 flip = rot_z(std::numbers::pi);
    const Mat3 a = slerp(Mat3::Identity(), flip, 0.5);
    const Mat3 b = slerp(Mat3::Identity(), flip, 0.5);
    CHECK(a == b);
    CHECK(std::abs(angle_between(Mat3::Identity(), a) - std::numbers::pi / 2) < 1e-9);
}

TEST_CASE("linear interpolation is affine with exact endpoints") {
    CameraPose end;
    end.translation = Vec3(0, 0, -8);
    const Trajectory t = interpolate(CameraPose::identity(), end, 49, PositionMode::Linear, kK);
    REQUIRE(t.size() == 49);
    CHECK(t.poses.front() == CameraPose::identity());
    CHECK(t.poses.back() == end);
    for (int k = 0; k < 49; ++k) CHECK(std::abs(t.poses[k].center().z() - 8.0 * k / 48.0) < 1e-12);
}

TEST_CASE("cubic spline passes through its waypoints") {
    const CameraPose start = CameraPose::from_center(Mat3::Identity(), Vec3(0, 0, 0));
    const CameraPose end = CameraPose::from_center(rot_z(0.5), Vec3(4, 0, 0));
    const Trajectory t = interpolate(start, end, 5, PositionMode::CubicSpline, kK, {Vec3(2, 1, 0)});
    // With one interior waypoint at parameter 1/2, the middle frame sits on it.
    CHECK((t.poses[2].center() - Vec3(2, 1, 0)).norm() < 1e-9);
    CHECK(t.poses.front() == start);
    CHECK(t.poses.back() == end);
}

TEST_CASE("interpolate needs two frames") {
    CHECK_THROWS_AS(interpolate(CameraPose::identity(), CameraPose::identity(), 1, PositionMode::Linear, kK), Error);
}

TEST_CASE("zoom out moves backward along the view axis") {
    const Trajectory t = plan_zoom_out(CameraPose::identity(), 2.0, 49, kK);
    // Camera center algebra: c = -R^T t.
    const CameraPose& last = t.poses.back();
    CHECK((-(last.rotation.transpose() * last.translation) - Vec3(0, 0, -2)).norm() < 1e-12);
    for (const auto& p : t.poses) CHECK(p.rotation == Mat3::Identity());
    const Trajectory two = plan_zoom_out(CameraPose::identity(), 2.0, 2, kK);
    CHECK(two.size() == 2);
    CHECK(two.poses[0] == CameraPose::identity());
}

TEST_CASE("orbit keeps its radius and is periodic") {
    const CameraPose start = CameraPose::from_center(Mat3::Identity(), Vec3(0, 0, -3));
    const Vec3 pivot(0, 0, 0);
    const Trajectory full = plan_orbit(start, pivot, 360.0 * 48.0 / 49.0, 49, kK);
    const Trajectory half = plan_orbit(start, pivot, 360.0, 49, kK);
    for (const auto& p : half.poses) CHECK(std::abs((p.center() - pivot).norm() - 3.0) < 1e-9);
    CHECK((half.poses.back().center() - start.center()).norm() < 1e-9);
    CHECK((half.poses[24].center() - Vec3(0, 0, 3)).norm() < 1e-9);
    CHECK(full.size() == 49);
}

TEST_CASE("negative orbit mirrors positive about the start-pivot plane") {
    const CameraPose start = CameraPose::from_center(Mat3::Identity(), Vec3(0.5, 0.2, -3));
    const Vec3 pivot(0.5, 0.2, 0);
    const Trajectory left = plan_orbit(start, pivot, 180.0, 13, kK);
    const Trajectory right = plan_orbit(start, pivot, -180.0, 13, kK);
    // Plane through the pivot containing the start center and the vertical axis has normal x.
    for (std::size_t i = 0; i < left.size(); ++i) {
        Vec3 a = left.poses[i].center() - pivot, b = right.poses[i].center() - pivot;
        b.x() = -b.x();
        CHECK((a - b).norm() < 1e-9);
    }
}

TEST_CASE("orbit re-aims at the pivot") {
    const CameraPose start = CameraPose::from_center(Mat3::Identity(), Vec3(0, 0, -3));
    const Trajectory t = plan_orbit(start, Vec3::Zero(), 90.0, 7, kK);
    for (const auto& p : t.poses) {
        const Vec3 in_cam = p.apply(Vec3::Zero());
        CHECK(std::abs(in_cam.x()) < 1e-9);
        CHECK(in_cam.z() > 0);
    }
}

TEST_CASE("orbit at the pivot is rejected") {
    CHECK_THROWS_AS(plan_orbit(CameraPose::identity(), Vec3::Zero(), 90.0, 5, kK), Error);
}

TEST_CASE("collision bound") {
    DepthMap d(3, 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) d.set(x, y, 5.0f);
    CHECK(collision_bound(d, 0.8) == doctest::Approx(4.0));
    d.set(1, 1, 1.0f);
    CHECK(collision_bound(d, 1.0) == 1.0);
    try {
        collision_bound(DepthMap(3, 3), 0.8);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyInput);
    }
}
