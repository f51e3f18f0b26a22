// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <memory>

#include "depth.hpp"
#include "interfaces.hpp"

using namespace scene_forge;

namespace {

const CameraIntrinsics kK{120, 120, 59.5, 39.5, 120, 80};

std::shared_ptr<const SyntheticWorld> shared_world() {
    static auto w = std::make_shared<const SyntheticWorld>(make_synthetic_world());
    return w;
}

Trajectory short_orbit() {
    return plan_orbit(SyntheticWorld::default_reference_pose(), Vec3(0, 0.5, 0), 90.0, 5, kK);
}

} // namespace

TEST_CASE("synthetic world is seeded and enclosed") {
    const auto w = shared_world();
    CHECK(w->scene.size() > 15000);
    CHECK(w->scene.size() < 25000);
    CHECK(make_synthetic_world().scene == w->scene);
    WorldSpec other;
    other.seed = 7;
    CHECK_FALSE(make_synthetic_world(other).scene == w->scene);
    for (const auto& pose : plan_orbit(SyntheticWorld::default_reference_pose(), Vec3(0, 0.5, 0), 360.0, 8, kK).poses) {
        const RenderOutput r = render(w->scene, kK, pose);
        CHECK(r.depth.valid_count() == r.depth.pixel_count());
    }
}

TEST_CASE("oracle completer renders the world and ignores its input") {
    const auto w = shared_world();
    const Trajectory t = short_orbit();
    auto completer = oracle_completer(w);
    std::vector<Image> empty(t.size(), Image(kK.width, kK.height, 3)), alphas(t.size(), Image(kK.width, kK.height, 1));
    const auto out = completer->complete(empty, alphas, t);
    REQUIRE(out.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(out[i].data == render(w->scene, kK, t.poses[i]).color.data);
        CHECK(out[i].width == kK.width);
    }
    std::vector<Image> noise(t.size(), Image(kK.width, kK.height, 3, 0.7f));
    CHECK(completer->complete(noise, alphas, t)[2].data == out[2].data);
}

TEST_CASE("oracle stereo returns true depths and poses") {
    const auto w = shared_world();
    const Trajectory t = short_orbit();
    auto stereo = oracle_stereo(w);
    std::vector<Image> frames(t.size(), Image(kK.width, kK.height, 3));
    const StereoResult res = stereo->estimate(frames, &t.poses, kK);
    REQUIRE(res.depths.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(res.poses[i] == t.poses[i]);
        const RenderOutput r = render(w->scene, kK, t.poses[i]);
        CHECK(res.depths[i].values == r.depth.values);
    }
}

TEST_CASE("median scaling undoes a stereo scale corruption") {
    const auto w = shared_world();
    const CameraPose ref = SyntheticWorld::default_reference_pose();
    const RenderOutput truth = render(w->scene, kK, ref);
    std::vector<CameraPose> hint = {ref};
    for (double s : {0.25, 0.5, 2.0, 4.0}) {
        auto stereo = oracle_stereo(w, {s, 0.0, 0});
        const StereoResult res = stereo->estimate({truth.color}, &hint, kK);
        CHECK(std::abs(median_scale(res.depths[0], truth.depth) * s - 1.0) < 1e-6);
    }
}

TEST_CASE("depth noise is seeded") {
    const auto w = shared_world();
    std::vector<CameraPose> hint = {SyntheticWorld::default_reference_pose()};
    const Image f(kK.width, kK.height, 3);
    const auto a = oracle_stereo(w, {1.0, 0.01, 3})->estimate({f}, &hint, kK);
    const auto b = oracle_stereo(w, {1.0, 0.01, 3})->estimate({f}, &hint, kK);
    const auto c = oracle_stereo(w, {1.0, 0.0, 3})->estimate({f}, &hint, kK);
    CHECK(a.depths[0].values == b.depths[0].values);
    CHECK_FALSE(a.depths[0].values == c.depths[0].values);
}

TEST_CASE("refiners") {
    Image img(32, 24, 3);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = float((i * 37) % 101) / 100.0f;
    auto id = identity_refiner();
    CHECK(id->refine(img, 0.6).data == img.data);
    CHECK(id->recorded_t() == std::vector<double>{0.6});
    auto blur = blur_refiner(1.5);
    const Image b = blur->refine(img, 0.6);
    CHECK(b.same_shape(img));
    CHECK(std::abs(image_mean(b) - image_mean(img)) < 1e-6);
    CHECK_FALSE(b.data == img.data);
    CHECK_THROWS(id->refine(img, 1.5));
}
