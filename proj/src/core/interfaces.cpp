// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "interfaces.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "error.hpp"
#include "random.hpp"

namespace scene_forge {

Image ImageRefiner::refine(const Image& image, double t) {
    if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::Parameter, "refine: t must lie in [0, 1]");
    {
        std::lock_guard lock(mutex_);
        recorded_t_.push_back(t);
    }
    Image out = do_refine(image, t);
    if (!out.same_shape(image)) fail(ErrorCode::Shape, "refine: refiner changed the image shape");
    return out;
}

std::vector<double> ImageRefiner::recorded_t() const {
    std::lock_guard lock(mutex_);
    return recorded_t_;
}

namespace {

constexpr double kCheckerSize = 0.5;
constexpr double kSurfaceThickness = 0.005;
constexpr double kSpreadFactor = 0.7;
constexpr float kSurfaceOpacity = 0.95f;

struct Patch {
    Vec3 origin;  // corner
    Vec3 u_axis;  // unit tangent
    Vec3 v_axis;  // unit tangent
    double u_len;
    double v_len;
    Color3 color_a;
    Color3 color_b;
    bool stripes; // boxes use stripes, walls use checkers
};

void add_patch(GaussianScene& scene, const Patch& patch, double spacing, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    std::uniform_real_distribution<double> shade(-0.03, 0.03);
    const int nu = std::max(1, static_cast<int>(std::lround(patch.u_len / spacing)));
    const int nv = std::max(1, static_cast<int>(std::lround(patch.v_len / spacing)));
    const double du = patch.u_len / nu, dv = patch.v_len / nv;
    const Vec3 normal = patch.u_axis.cross(patch.v_axis);
    Mat3 frame;
    frame.col(0) = patch.u_axis;
    frame.col(1) = patch.v_axis;
    frame.col(2) = normal;
    const Eigen::Quaterniond q(frame);
    const double sigma = kSpreadFactor * std::max(du, dv);
    for (int a = 0; a < nu; ++a) {
        for (int b = 0; b < nv; ++b) {
            const double u = (a + 0.5 + jitter(rng)) * du;
            const double v = (b + 0.5 + jitter(rng)) * dv;
            const Vec3 p = patch.origin + u * patch.u_axis + v * patch.v_axis;
            bool pick_a;
            if (patch.stripes) {
                pick_a = static_cast<int>(std::floor(u / (0.5 * kCheckerSize))) % 2 == 0;
            } else {
                const Vec3 w = p + Vec3::Constant(100.0);
                const int parity = static_cast<int>(std::floor(w.dot(patch.u_axis.cwiseAbs()) / kCheckerSize) +
                                                    std::floor(w.dot(patch.v_axis.cwiseAbs()) / kCheckerSize));
                pick_a = parity % 2 == 0;
            }
            Color3 c = pick_a ? patch.color_a : patch.color_b;
            const float s = static_cast<float>(shade(rng));
            const std::size_t i = scene.size();
            scene.resize(i + 1);
            for (int k = 0; k < 3; ++k) {
                scene.centers[3 * i + k] = static_cast<float>(p[k]);
                scene.colors[3 * i + k] = std::clamp(c[k] + s, 0.0f, 1.0f);
            }
            scene.log_scales[3 * i + 0] = static_cast<float>(std::log(sigma));
            scene.log_scales[3 * i + 1] = static_cast<float>(std::log(sigma));
            scene.log_scales[3 * i + 2] = static_cast<float>(std::log(kSurfaceThickness));
            scene.opacity_logits[i] = static_cast<float>(logit(kSurfaceOpacity));
            scene.rotations[4 * i + 0] = static_cast<float>(q.w());
            scene.rotations[4 * i + 1] = static_cast<float>(q.x());
            scene.rotations[4 * i + 2] = static_cast<float>(q.y());
            scene.rotations[4 * i + 3] = static_cast<float>(q.z());
        }
    }
}

// Rectangles of an axis-aligned box (all faces but the bottom); u x v points outward.
std::vector<Patch> box_patches(const Vec3& lo, const Vec3& hi, const Color3& a, const Color3& b) {
    const Vec3 d = hi - lo;
    const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();
    return {
        {lo, Y, X, d.y(), d.x(), a, b, true},                            // -z
        {Vec3(lo.x(), lo.y(), hi.z()), X, Y, d.x(), d.y(), a, b, true},  // +z
        {lo, Z, Y, d.z(), d.y(), a, b, true},                            // -x
        {Vec3(hi.x(), lo.y(), lo.z()), Y, Z, d.y(), d.z(), a, b, true},  // +x
        {lo, X, Z, d.x(), d.z(), a, b, true},                            // top (-y)
    };
}

} // namespace

CameraPose SyntheticWorld::default_reference_pose() {
    return CameraPose::from_center(Mat3::Identity(), Vec3(0.0, 0.5, -1.0));
}

SyntheticWorld make_synthetic_world(const WorldSpec& spec) {
    if (!(spec.room_size > 0.0)) fail(ErrorCode::Parameter, "world: room_size must be positive");
    if (spec.box_count < 0 || spec.box_count > 4) fail(ErrorCode::Parameter, "world: box_count must lie in [0, 4]");
    if (spec.target_gaussians < 100) fail(ErrorCode::Parameter, "world: target_gaussians must be at least 100");

    SyntheticWorld world;
    world.spec = spec;
    std::mt19937_64 rng = substream(spec.seed, "world-gen");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double h = spec.room_size / 2.0;
    const double s = spec.room_size / 5.0; // layout below is authored for a 5 m room

    // Boxes first so the spacing can account for their area.
    const std::array<Vec2, 4> anchors = {Vec2(-1.5, 1.5), Vec2(1.4, 1.3), Vec2(-1.7, -1.3), Vec2(1.6, -1.6)};
    struct Box {
        Vec3 lo, hi;
        Color3 a, b;
    };
    std::vector<Box> boxes;
    double area = 6.0 * spec.room_size * spec.room_size;
    for (int i = 0; i < spec.box_count; ++i) {
        const double w = (0.5 + 0.4 * unit(rng)) * s, d = (0.5 + 0.4 * unit(rng)) * s, ht = (0.6 + 0.6 * unit(rng)) * s;
        const double cx = (anchors[i].x() + 0.2 * (2.0 * unit(rng) - 1.0)) * s;
        const double cz = (anchors[i].y() + 0.2 * (2.0 * unit(rng) - 1.0)) * s;
        Box box;
        box.lo = Vec3(cx - w / 2, h - ht, cz - d / 2);
        box.hi = Vec3(cx + w / 2, h, cz + d / 2);
        box.a = Color3(float(0.2 + 0.7 * unit(rng)), float(0.2 + 0.7 * unit(rng)), float(0.2 + 0.7 * unit(rng)));
        box.b = (box.a * 0.55f).eval();
        area += 2.0 * (w * ht + d * ht) + w * d;
        boxes.push_back(box);
    }
    const double spacing = std::sqrt(area / static_cast<double>(spec.target_gaussians));

    const std::array<std::pair<Color3, Color3>, 6> palette = {{
        {Color3(0.85f, 0.80f, 0.70f), Color3(0.45f, 0.35f, 0.30f)}, // floor
        {Color3(0.90f, 0.90f, 0.85f), Color3(0.60f, 0.60f, 0.65f)}, // ceiling
        {Color3(0.30f, 0.50f, 0.75f), Color3(0.75f, 0.85f, 0.90f)}, // -x
        {Color3(0.75f, 0.40f, 0.35f), Color3(0.90f, 0.75f, 0.60f)}, // +x
        {Color3(0.40f, 0.65f, 0.40f), Color3(0.80f, 0.90f, 0.70f)}, // -z
        {Color3(0.55f, 0.45f, 0.70f), Color3(0.85f, 0.80f, 0.90f)}, // +z
    }};
    const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();
    const double L = spec.room_size;
    // Walls face inward: u x v points into the room.
    const std::array<Patch, 6> walls = {{
        {Vec3(-h, h, -h), X, Z, L, L, palette[0].first, palette[0].second, false},   // floor y=+h, normal -Y
        {Vec3(-h, -h, -h), Z, X, L, L, palette[1].first, palette[1].second, false},  // ceiling y=-h, normal +Y
        {Vec3(-h, -h, -h), Y, Z, L, L, palette[2].first, palette[2].second, false},  // x=-h, normal +X
        {Vec3(h, -h, -h), Z, Y, L, L, palette[3].first, palette[3].second, false},   // x=+h, normal -X
        {Vec3(-h, -h, -h), X, Y, L, L, palette[4].first, palette[4].second, false},  // z=-h, normal +Z
        {Vec3(-h, -h, h), Y, X, L, L, palette[5].first, palette[5].second, false},   // z=+h, normal -Z
    }};
    for (const auto& wall : walls) add_patch(world.scene, wall, spacing, rng);
    for (const auto& box : boxes)
        for (const auto& patch : box_patches(box.lo, box.hi, box.a, box.b)) add_patch(world.scene, patch, spacing, rng);
    project_to_constraints(world.scene);
    return world;
}

namespace {

class OracleCompleter final : public ViewCompleter {
public:
    OracleCompleter(std::shared_ptr<const SyntheticWorld> world, RenderSettings settings)
        : world_(std::move(world)), settings_(settings) {}

    std::vector<Image> complete(const std::vector<Image>& frames, const std::vector<Image>& alphas,
                                const Trajectory& trajectory) override {
        if (frames.size() != trajectory.size() || alphas.size() != trajectory.size())
            fail(ErrorCode::Shape, "oracle_completer: frame, alpha and pose counts differ");
        std::vector<Image> out;
        out.reserve(trajectory.size());
        for (std::size_t i = 0; i < trajectory.size(); ++i) {
            const auto& f = frames[i];
            if (f.width != trajectory.intrinsics.width || f.height != trajectory.intrinsics.height)
                fail(ErrorCode::Shape, "oracle_completer: frame size does not match the intrinsics");
            out.push_back(render(world_->scene, trajectory.intrinsics, trajectory.poses[i], settings_).color);
        }
        return out;
    }

private:
    std::shared_ptr<const SyntheticWorld> world_;
    RenderSettings settings_;
};

class OracleStereo final : public DenseStereo {
public:
    OracleStereo(std::shared_ptr<const SyntheticWorld> world, StereoCorruption corruption, RenderSettings settings)
        : world_(std::move(world)), corruption_(corruption), settings_(settings) {}

    StereoResult estimate(const std::vector<Image>& frames, const std::vector<CameraPose>* pose_hints,
                          const CameraIntrinsics& k) override {
        if (pose_hints == nullptr) fail(ErrorCode::Parameter, "oracle_stereo: pose hints are required");
        if (pose_hints->size() != frames.size()) fail(ErrorCode::Shape, "oracle_stereo: frame and pose counts differ");
        std::mt19937_64 rng = substream(corruption_.seed, "stereo-noise");
        std::normal_distribution<double> noise(0.0, 1.0);
        StereoResult result;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            if (frames[i].width != k.width || frames[i].height != k.height)
                fail(ErrorCode::Shape, "oracle_stereo: frame size does not match the intrinsics");
            DepthMap depth = render(world_->scene, k, (*pose_hints)[i], settings_).depth;
            for (std::size_t p = 0; p < depth.values.size(); ++p) {
                if (!depth.valid[p]) continue;
                double v = corruption_.scale * depth.values[p];
                if (corruption_.noise_sigma > 0.0) v += corruption_.noise_sigma * noise(rng);
                if (v > 0.0) depth.values[p] = static_cast<float>(v);
                else depth.invalidate(p);
            }
            result.depths.push_back(std::move(depth));
            result.poses.push_back((*pose_hints)[i]);
        }
        return result;
    }

private:
    std::shared_ptr<const SyntheticWorld> world_;
    StereoCorruption corruption_;
    RenderSettings settings_;
};

class IdentityRefiner final : public ImageRefiner {
protected:
    Image do_refine(const Image& image, double) override { return image; }
};

class BlurRefiner final : public ImageRefiner {
public:
    explicit BlurRefiner(double sigma) : sigma_(sigma) {
        if (!(sigma > 0.0)) fail(ErrorCode::Parameter, "blur_refiner: sigma must be positive");
        radius_ = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
        for (int i = -radius_; i <= radius_; ++i) taps_.push_back(std::exp(-0.5 * i * i / (sigma * sigma)));
    }

protected:
    // Scatter form: each source pixel spreads its value over in-image targets with weights
    // renormalized to one, so the image sum is preserved exactly.
    Image do_refine(const Image& image, double) override {
        Image tmp = pass(image, true);
        return pass(tmp, false);
    }

private:
    Image pass(const Image& in, bool horizontal) const {
        Image out(in.width, in.height, in.channels);
        const int len = horizontal ? in.width : in.height;
        std::vector<double> norm(len, 0.0);
        for (int s = 0; s < len; ++s)
            for (int k = -radius_; k <= radius_; ++k)
                if (s + k >= 0 && s + k < len) norm[s] += taps_[k + radius_];
        std::vector<double> acc;
        for (int line = 0; line < (horizontal ? in.height : in.width); ++line) {
            for (int c = 0; c < in.channels; ++c) {
                acc.assign(len, 0.0);
                for (int s = 0; s < len; ++s) {
                    const float v = horizontal ? in.at(s, line, c) : in.at(line, s, c);
                    for (int k = -radius_; k <= radius_; ++k)
                        if (s + k >= 0 && s + k < len) acc[s + k] += v * taps_[k + radius_] / norm[s];
                }
                for (int s = 0; s < len; ++s) (horizontal ? out.at(s, line, c) : out.at(line, s, c)) = float(acc[s]);
            }
        }
        return out;
    }

    double sigma_;
    int radius_ = 1;
    std::vector<double> taps_;
};

} // namespace

std::unique_ptr<ViewCompleter> oracle_completer(std::shared_ptr<const SyntheticWorld> world, RenderSettings settings) {
    if (!world) fail(ErrorCode::Parameter, "oracle_completer: world is null");
    return std::make_unique<OracleCompleter>(std::move(world), settings);
}

std::unique_ptr<DenseStereo> oracle_stereo(std::shared_ptr<const SyntheticWorld> world, StereoCorruption corruption,
                                           RenderSettings settings) {
    if (!world) fail(ErrorCode::Parameter, "oracle_stereo: world is null");
    if (!(corruption.scale > 0.0)) fail(ErrorCode::Parameter, "oracle_stereo: scale must be positive");
    if (!(corruption.noise_sigma >= 0.0)) fail(ErrorCode::Parameter, "oracle_stereo: noise must be >= 0");
    return std::make_unique<OracleStereo>(std::move(world), corruption, settings);
}

std::unique_ptr<ImageRefiner> identity_refiner() { return std::make_unique<IdentityRefiner>(); }

std::unique_ptr<ImageRefiner> blur_refiner(double sigma) { return std::make_unique<BlurRefiner>(sigma); }

} // namespace scene_forge
