// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <tbb/global_control.h>

#include <cmath>

#include "../support/gradcheck.hpp"
#include "error.hpp"
#include "splat.hpp"

using namespace scene_forge;

namespace {

const CameraIntrinsics kK{100, 100, 16, 16, 32, 32};

GaussianScene one_point(const Vec3& p, const Color3& c) {
    PointCloud pc;
    pc.positions.push_back(p);
    pc.colors.push_back(c);
    return from_point_cloud(pc);
}

GaussianScene blob(const Vec3& p, const Color3& c, double scale, double opacity) {
    GaussianScene s = one_point(p, c);
    for (auto& v : s.log_scales) v = float(std::log(scale));
    s.opacity_logits[0] = float(logit(opacity));
    return s;
}

} // namespace

TEST_CASE("from_point_cloud uses the initial constants") {
    GaussianScene s = one_point(Vec3(1, 2, 3), Color3(0.1f, 0.2f, 0.3f));
    REQUIRE(s.size() == 1);
    for (float v : s.log_scales) CHECK(std::exp(double(v)) == doctest::Approx(3e-4).epsilon(1e-6));
    CHECK(sigmoid(double(s.opacity_logits[0])) == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(s.rotations == std::vector<float>{1, 0, 0, 0});
    CHECK(s.colors == std::vector<float>{0.1f, 0.2f, 0.3f});
    CHECK(from_point_cloud(PointCloud{}).size() == 0);
}

TEST_CASE("single Gaussian on the optical axis") {
    const RenderOutput r = render(one_point(Vec3(0, 0, 2), Color3(1, 0.5f, 0.2f)), kK, CameraPose::identity());
    CHECK(r.alpha.at(16, 16) == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(r.color.at(16, 16, 0) == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(r.depth.values[r.depth.index(16, 16)] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("empty scene renders background") {
    RenderSettings rs;
    rs.background = Color3(0.25f, 0.5f, 0.75f);
    const RenderOutput r = render(GaussianScene{}, kK, CameraPose::identity(), rs);
    for (float a : r.alpha.data) CHECK(a == 0.0f);
    CHECK(r.color.at(3, 5, 1) == 0.5f);
    CHECK(r.depth.valid_count() == 0);
}

TEST_CASE("two Gaussians composite front to back") {
    const GaussianScene near = blob(Vec3(0, 0, 2), Color3(1, 0, 0), 0.05, 0.6);
    const GaussianScene far = blob(Vec3(0, 0, 4), Color3(0, 0, 1), 0.1, 0.7);
    GaussianScene both = far;
    both.append(near); // index order opposite to depth order
    const double a1 = render(near, kK, CameraPose::identity()).alpha.at(16, 16);
    const double a2 = render(far, kK, CameraPose::identity()).alpha.at(16, 16);
    const RenderOutput r = render(both, kK, CameraPose::identity());
    CHECK(r.color.at(16, 16, 0) == doctest::Approx(a1).epsilon(1e-5));
    CHECK(r.color.at(16, 16, 2) == doctest::Approx(a2 * (1 - a1)).epsilon(1e-5));
    CHECK(r.alpha.at(16, 16) == doctest::Approx(a1 + a2 * (1 - a1)).epsilon(1e-5));
}

TEST_CASE("points behind the camera are culled") {
    const RenderOutput r = render(blob(Vec3(0, 0, -2), Color3(1, 1, 1), 0.1, 0.9), kK, CameraPose::identity());
    CHECK(r.stats.visible == 0);
    for (float a : r.alpha.data) CHECK(a == 0.0f);
}

TEST_CASE("alpha shrinks monotonically with opacity") {
    GaussianScene s = testing::random_scene<float>(40, 3, kK);
    double prev = 1e9;
    for (double shift : {0.0, -2.0, -4.0, -8.0, -16.0}) {
        GaussianScene t = s;
        for (auto& o : t.opacity_logits) o += float(shift);
        const RenderOutput r = render(t, kK, CameraPose::identity());
        double sum = 0;
        for (float a : r.alpha.data) {
            CHECK(a >= 0.0f);
            CHECK(a <= 1.0f);
            sum += a;
        }
        CHECK(sum <= prev);
        prev = sum;
    }
}

TEST_CASE("render is identical across thread counts") {
    const GaussianScene s = testing::random_scene<float>(500, 17, CameraIntrinsics{200, 200, 64, 48, 128, 96});
    const CameraIntrinsics k{200, 200, 64, 48, 128, 96};
    RenderOutput one, many;
    {
        tbb::global_control c(tbb::global_control::max_allowed_parallelism, 1);
        one = render(s, k, CameraPose::identity());
    }
    {
        tbb::global_control c(tbb::global_control::max_allowed_parallelism, 4);
        many = render(s, k, CameraPose::identity());
    }
    CHECK(one.color.data == many.color.data);
    CHECK(one.alpha.data == many.alpha.data);
    CHECK(one.depth.values == many.depth.values);
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
    const auto s = testing::random_scene<double>(20, 5, kK);
    Rasterizer<double> r;
    r.forward(s, kK, CameraPose::identity());
    const Image zero(32, 32, 3);
    const auto g = r.backward(s, {&zero, nullptr, nullptr});
    for (double v : g.params.centers) CHECK(v == 0.0);
    for (double v : g.params.opacity_logits) CHECK(v == 0.0);
    for (double v : g.params.rotations) CHECK(v == 0.0);
}

TEST_CASE("color gradient of a summed render is the weighted transmittance") {
    // For L = sum of red, dL/dc_red is the sum over pixels of alpha * T for the lone Gaussian,
    // which is its own alpha image.
    const GaussianParams<double> s = blob(Vec3(0, 0, 2), Color3(0.3f, 0.3f, 0.3f), 0.04, 0.7).cast<double>();
    Rasterizer<double> r;
    const RenderOutput out = r.forward(s, kK, CameraPose::identity());
    Image up(32, 32, 3);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) up.at(x, y, 0) = 1.0f;
    const auto g = r.backward(s, {&up, nullptr, nullptr});
    double alpha_sum = 0;
    for (float a : out.alpha.data) alpha_sum += a;
    CHECK(g.params.colors[0] == doctest::Approx(alpha_sum).epsilon(1e-5));
    CHECK(g.params.colors[1] == 0.0);
}

TEST_CASE("backward refuses a stale forward cache") {
    auto s = testing::random_scene<double>(5, 1, kK);
    Rasterizer<double> r;
    r.forward(s, kK, CameraPose::identity());
    s.colors[0] += 0.1;
    const Image up(32, 32, 3);
    try {
        r.backward(s, {&up, nullptr, nullptr});
        FAIL("expected an invariant error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Invariant);
    }
}

TEST_CASE("analytic gradients match finite differences") {
    const auto s = testing::random_scene<double>(12, 23, kK);
    const auto res = testing::check_render_gradients(s, kK, CameraPose::identity(), 99, 1e-6, 1e-3);
    CHECK(res.pass_fraction() >= 0.99);
}

TEST_CASE("scene validation") {
    GaussianScene s = one_point(Vec3(0, 0, 1), Color3(0.5f, 0.5f, 0.5f));
    CHECK_NOTHROW(validate_scene(s));
    s.rotations[0] = 2.0f;
    CHECK_THROWS_AS(validate_scene(s), Error);
    project_to_constraints(s);
    CHECK_NOTHROW(validate_scene(s));
}
