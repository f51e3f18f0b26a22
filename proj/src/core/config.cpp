// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "codec.hpp"
#include "error.hpp"
#include "wire.hpp"

namespace scene_forge {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    fail(ErrorCode::Config, path + ": " + what, path);
}

// Walks one JSON object, recording which keys were consumed so leftovers can be rejected.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) bad(path_.empty() ? "$" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out, double lo, double hi, bool lo_open = false) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_number()) bad(at(key), "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x) || x < lo || x > hi || (lo_open && x == lo)) bad(at(key), "out of range " + range(lo, hi, lo_open));
        out = x;
    }

    void integer(const std::string& key, int& out, int lo, int hi) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_number_integer()) bad(at(key), "expected an integer");
        const auto x = v->get<long long>();
        if (x < lo || x > hi) bad(at(key), "out of range " + range(lo, hi, false));
        out = int(x);
    }

    void uint64(const std::string& key, std::uint64_t& out) {
        const json* v = find(key);
        if (!v) return;
        const bool ok = v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0);
        if (!ok) bad(at(key), "expected a non-negative integer");
        out = v->get<std::uint64_t>();
    }

    void boolean(const std::string& key, bool& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_boolean()) bad(at(key), "expected a boolean");
        out = v->get<bool>();
    }

    void string(const std::string& key, std::string& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_string()) bad(at(key), "expected a string");
        out = v->get<std::string>();
    }

    std::optional<Vec3> vec3(const std::string& key, std::optional<Vec3> fallback) {
        const json* v = find(key);
        if (!v || v->is_null()) return v ? std::nullopt : fallback;
        if (!v->is_array() || v->size() != 3) bad(at(key), "expected 3 numbers or null");
        Vec3 out;
        for (int i = 0; i < 3; ++i) {
            if (!(*v)[i].is_number() || !std::isfinite((*v)[i].get<double>()))
                bad(at(key) + "[" + std::to_string(i) + "]", "expected a finite number");
            out[i] = (*v)[i].get<double>();
        }
        return out;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) bad(at(it.key()), "unknown key");
    }

private:
    static std::string range(double lo, double hi, bool lo_open) {
        auto fmt = [](double x) {
            if (x == std::numeric_limits<double>::max() || x == std::numeric_limits<int>::max()) return std::string("inf");
            json j = x;
            return j.dump();
        };
        return std::string(lo_open ? "(" : "[") + fmt(lo) + ", " + fmt(hi) + "]";
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

constexpr double kInf = std::numeric_limits<double>::max();
constexpr int kIntMax = std::numeric_limits<int>::max();

StageSpec parse_stage(const json& j, const std::string& path) {
    Section s(j, path);
    std::string kind;
    s.string("kind", kind);
    StageSpec out;
    if (kind == "zoom_out") {
        out = StageSpec::zoom_out(1.0);
        s.number("travel", out.travel, 0.0, kInf, true);
    } else if (kind == "orbit") {
        out = StageSpec::orbit(180.0);
        s.number("angle_deg", out.angle_deg, -360.0, 360.0);
    } else {
        bad(s.at("kind"), "expected \"zoom_out\" or \"orbit\"");
    }
    s.integer("frames", out.frames, 2, 100000);
    s.finish();
    return out;
}

json stage_to_json(const StageSpec& st) {
    if (st.kind == StageSpec::Kind::ZoomOut) return {{"kind", "zoom_out"}, {"travel", st.travel}, {"frames", st.frames}};
    return {{"kind", "orbit"}, {"angle_deg", st.angle_deg}, {"frames", st.frames}};
}

json vec3_or_null(const std::optional<Vec3>& v) {
    if (!v) return nullptr;
    return json::array({(*v)[0], (*v)[1], (*v)[2]});
}

void parse_expansion(const json& j, ExpansionConfig& e) {
    Section s(j, "expansion");
    if (const json* sched = s.find("schedule")) {
        if (!sched->is_array()) bad("expansion.schedule", "expected an array");
        e.schedule.clear();
        for (std::size_t i = 0; i < sched->size(); ++i)
            e.schedule.push_back(parse_stage((*sched)[i], "expansion.schedule[" + std::to_string(i) + "]"));
    }
    s.integer("keyframes", e.keyframes, 1, 100000);
    s.boolean("refine_enabled", e.refine_enabled);
    s.number("refine_t", e.refine_t, 0.0, 1.0, true);
    if (e.refine_t >= 1.0) bad("expansion.refine_t", "out of range (0, 1)");
    s.integer("refine_views", e.refine_views, 1, 10000);
    s.integer("refine_iters", e.refine_iters, 0, kIntMax);
    s.integer("stage_iters", e.stage_iters, 0, kIntMax);
    s.number("collision_safety", e.collision_safety, 0.0, 1.0, true);
    s.number("reference_alpha_min", e.reference_alpha_min, 0.0, 1.0, true);
    s.number("reference_min_coverage", e.reference_min_coverage, 0.0, 1.0);
    e.pivot = s.vec3("pivot", e.pivot);
    std::string dil = e.dilation_target == DilationTarget::Known ? "known" : "unknown";
    s.string("dilation_target", dil);
    if (dil == "known") e.dilation_target = DilationTarget::Known;
    else if (dil == "unknown") e.dilation_target = DilationTarget::Unknown;
    else bad("expansion.dilation_target", "expected \"known\" or \"unknown\"");
    s.finish();
}

void parse_optim(const json& j, OptimSettings& o) {
    Section s(j, "optim");
    s.number("lr_position", o.lr_position, 0.0, kInf, true);
    s.number("lr_color", o.lr_color, 0.0, kInf, true);
    s.number("lr_opacity", o.lr_opacity, 0.0, kInf, true);
    s.number("lr_scale", o.lr_scale, 0.0, kInf, true);
    s.number("lr_rotation", o.lr_rotation, 0.0, kInf, true);
    s.number("beta1", o.beta1, 0.0, 1.0);
    s.number("beta2", o.beta2, 0.0, 1.0);
    if (o.beta1 >= 1.0) bad("optim.beta1", "out of range [0, 1)");
    if (o.beta2 >= 1.0) bad("optim.beta2", "out of range [0, 1)");
    s.number("epsilon", o.epsilon, 0.0, kInf, true);
    s.integer("densify_interval", o.densify_interval, 0, kIntMax);
    s.integer("densify_until", o.densify_until, 0, kIntMax);
    s.number("prune_opacity_threshold", o.prune_opacity_threshold, 0.0, 1.0);
    if (o.prune_opacity_threshold >= 1.0) bad("optim.prune_opacity_threshold", "out of range [0, 1)");
    s.number("split_grad_threshold", o.split_grad_threshold, 0.0, kInf, true);
    s.number("percent_dense", o.percent_dense, 0.0, 1.0, true);
    s.finish();
}

void parse_loss(const json& j, ExpansionConfig& e) {
    Section s(j, "loss");
    s.number("w_l1", e.weights.w_l1, 0.0, kInf);
    s.number("w_ssim", e.weights.w_ssim, 0.0, kInf);
    s.number("w_lpips", e.weights.w_lpips, 0.0, kInf);
    s.string("perceptual", e.perceptual);
    s.finish();
    if (!(e.weights.w_l1 > 0 || e.weights.w_ssim > 0 || e.weights.w_lpips > 0))
        bad("loss", "at least one weight must be positive");
}

void parse_align(const json& j, AlignmentParams& a) {
    Section s(j, "align");
    s.integer("guided_filter_radius", a.guided_filter_radius, 1, 10000);
    s.number("guided_filter_eps", a.guided_filter_eps, 0.0, kInf);
    s.integer("dilation_iters", a.dilation_iters, 0, 100000);
    s.number("alpha_threshold", a.alpha_threshold, 0.0, 1.0, true);
    if (a.alpha_threshold >= 1.0) bad("align.alpha_threshold", "out of range (0, 1)");
    s.finish();
}

void parse_render(const json& j, RenderSettings& r) {
    Section s(j, "render");
    s.number("screen_blur", r.screen_blur, 0.0, kInf);
    s.number("near_plane", r.near_plane, 0.0, kInf, true);
    if (auto bg = s.vec3("background", Vec3(r.background.cast<double>()))) {
        for (int i = 0; i < 3; ++i)
            if ((*bg)[i] < 0.0 || (*bg)[i] > 1.0) bad("render.background[" + std::to_string(i) + "]", "out of range [0, 1]");
        r.background = bg->cast<Color3::Scalar>();
    }
    s.finish();
}

void parse_world(const json& j, WorldSpec& w) {
    Section s(j, "world");
    s.uint64("seed", w.seed);
    s.number("room_size", w.room_size, 0.0, kInf, true);
    s.integer("box_count", w.box_count, 0, 64);
    int target = int(w.target_gaussians);
    s.integer("target_gaussians", target, 1, 50'000'000);
    w.target_gaussians = std::size_t(target);
    s.finish();
}

void parse_completer(const json& j, CompleterSpec& c) {
    Section s(j, "completer");
    std::string kind = c.kind == CompleterSpec::Kind::Oracle ? "oracle" : "remote";
    s.string("kind", kind);
    if (kind == "oracle") c.kind = CompleterSpec::Kind::Oracle;
    else if (kind == "remote") c.kind = CompleterSpec::Kind::Remote;
    else bad("completer.kind", "expected \"oracle\" or \"remote\"");
    s.string("endpoint", c.endpoint);
    s.number("timeout", c.timeout_seconds, 0.0, kInf, true);
    s.integer("max_attempts", c.retry.max_attempts, 1, 100);
    double backoff = double(c.retry.initial_backoff.count()) / 1000.0;
    s.number("initial_backoff", backoff, 0.0, 3600.0);
    c.retry.initial_backoff = std::chrono::milliseconds(std::llround(backoff * 1000.0));
    s.finish();
    if (c.kind == CompleterSpec::Kind::Remote && c.endpoint.rfind("http://", 0) != 0)
        bad("completer.endpoint", "a remote completer needs an http:// endpoint");
}

void parse_stereo(const json& j, StereoSpec& st) {
    Section s(j, "stereo");
    std::string kind = "oracle";
    s.string("kind", kind);
    if (kind != "oracle") bad("stereo.kind", "expected \"oracle\"");
    s.number("scale", st.corruption.scale, 0.0, kInf, true);
    s.number("noise_sigma", st.corruption.noise_sigma, 0.0, kInf);
    s.finish();
}

void parse_refiner(const json& j, RefinerSpec& r) {
    Section s(j, "refiner");
    std::string kind = r.kind == RefinerSpec::Kind::Identity ? "identity" : "blur";
    s.string("kind", kind);
    if (kind == "identity") r.kind = RefinerSpec::Kind::Identity;
    else if (kind == "blur") r.kind = RefinerSpec::Kind::Blur;
    else bad("refiner.kind", "expected \"identity\" or \"blur\"");
    s.number("sigma", r.sigma, 0.0, kInf, true);
    s.finish();
}

void parse_trajectory(const json& j, TrajectorySpec& t) {
    Section s(j, "trajectory");
    json stage = json::object();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "pivot") {
            s.find(it.key());
            stage[it.key()] = it.value();
        }
    if (!stage.empty()) t.stage = parse_stage(stage, "trajectory");
    t.pivot = s.vec3("pivot", t.pivot);
    s.finish();
}

void parse_output(const json& j, OutputSpec& o) {
    Section s(j, "output");
    s.string("scene", o.scene);
    s.string("report", o.report);
    s.string("dir", o.dir);
    s.finish();
}

} // namespace

void PipelineConfig::set_seed(std::uint64_t s) {
    seed = s;
    world.seed = s;
    expansion.seed = s;
    stereo.corruption.seed = s;
}

PipelineConfig parse_config(const json& j) {
    PipelineConfig c;
    Section s(j, "");
    const json* ver = s.find("schema_version");
    if (!ver) bad("schema_version", "missing");
    if (!ver->is_number_integer() || ver->get<long long>() != kSchemaVersion)
        bad("schema_version", "unsupported, expected " + std::to_string(kSchemaVersion));
    std::uint64_t seed = c.seed;
    s.uint64("seed", seed);
    c.set_seed(seed);
    // Sections are parsed in a fixed order so "world.seed" can override the master seed.
    if (const json* v = s.find("world")) parse_world(*v, c.world);
    if (const json* v = s.find("intrinsics")) {
        try {
            c.intrinsics = intrinsics_from_json(*v, "intrinsics");
        } catch (const Error& e) {
            fail(ErrorCode::Config, e.what(), e.where());
        }
    }
    if (const json* v = s.find("reference_pose")) {
        try {
            c.reference_pose = pose_from_json(*v, "reference_pose");
        } catch (const Error& e) {
            fail(ErrorCode::Config, e.what(), e.where());
        }
    }
    if (const json* v = s.find("expansion")) parse_expansion(*v, c.expansion);
    if (const json* v = s.find("optim")) parse_optim(*v, c.expansion.optim);
    if (const json* v = s.find("loss")) parse_loss(*v, c.expansion);
    if (const json* v = s.find("align")) parse_align(*v, c.expansion.align);
    if (const json* v = s.find("render")) parse_render(*v, c.expansion.render);
    if (const json* v = s.find("completer")) parse_completer(*v, c.completer);
    if (const json* v = s.find("stereo")) parse_stereo(*v, c.stereo);
    if (const json* v = s.find("refiner")) parse_refiner(*v, c.refiner);
    if (const json* v = s.find("trajectory")) parse_trajectory(*v, c.trajectory);
    s.integer("start_frame", c.start_frame, 0, kIntMax);
    if (const json* v = s.find("output")) parse_output(*v, c.output);
    s.finish();
    if (c.start_frame >= c.trajectory.stage.frames) bad("start_frame", "beyond the trajectory length");
    c.expansion.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    json j;
    try {
        j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Config, "config is not valid JSON: " + std::string(e.what()), "$");
    }
    return parse_config(j);
}

json config_to_json(const PipelineConfig& c) {
    const ExpansionConfig& e = c.expansion;
    json sched = json::array();
    for (const auto& st : e.schedule) sched.push_back(stage_to_json(st));
    json traj = stage_to_json(c.trajectory.stage);
    traj["pivot"] = vec3_or_null(c.trajectory.pivot);
    const auto& o = e.optim;
    return {
        {"schema_version", c.schema_version},
        {"seed", c.seed},
        {"world",
         {{"seed", c.world.seed},
          {"room_size", c.world.room_size},
          {"box_count", c.world.box_count},
          {"target_gaussians", c.world.target_gaussians}}},
        {"intrinsics", intrinsics_to_json(c.intrinsics)},
        {"reference_pose", pose_to_json(c.reference_pose)},
        {"expansion",
         {{"schedule", sched},
          {"keyframes", e.keyframes},
          {"refine_enabled", e.refine_enabled},
          {"refine_t", e.refine_t},
          {"refine_views", e.refine_views},
          {"refine_iters", e.refine_iters},
          {"stage_iters", e.stage_iters},
          {"collision_safety", e.collision_safety},
          {"reference_alpha_min", e.reference_alpha_min},
          {"reference_min_coverage", e.reference_min_coverage},
          {"pivot", vec3_or_null(e.pivot)},
          {"dilation_target", e.dilation_target == DilationTarget::Known ? "known" : "unknown"}}},
        {"optim",
         {{"lr_position", o.lr_position},
          {"lr_color", o.lr_color},
          {"lr_opacity", o.lr_opacity},
          {"lr_scale", o.lr_scale},
          {"lr_rotation", o.lr_rotation},
          {"beta1", o.beta1},
          {"beta2", o.beta2},
          {"epsilon", o.epsilon},
          {"densify_interval", o.densify_interval},
          {"densify_until", o.densify_until},
          {"prune_opacity_threshold", o.prune_opacity_threshold},
          {"split_grad_threshold", o.split_grad_threshold},
          {"percent_dense", o.percent_dense}}},
        {"loss",
         {{"w_l1", e.weights.w_l1}, {"w_ssim", e.weights.w_ssim}, {"w_lpips", e.weights.w_lpips}, {"perceptual", e.perceptual}}},
        {"align",
         {{"guided_filter_radius", e.align.guided_filter_radius},
          {"guided_filter_eps", e.align.guided_filter_eps},
          {"dilation_iters", e.align.dilation_iters},
          {"alpha_threshold", e.align.alpha_threshold}}},
        {"render",
         {{"screen_blur", e.render.screen_blur},
          {"near_plane", e.render.near_plane},
          {"background", vec3_or_null(Vec3(e.render.background.cast<double>()))}}},
        {"completer",
         {{"kind", c.completer.kind == CompleterSpec::Kind::Oracle ? "oracle" : "remote"},
          {"endpoint", c.completer.endpoint},
          {"timeout", c.completer.timeout_seconds},
          {"max_attempts", c.completer.retry.max_attempts},
          {"initial_backoff", double(c.completer.retry.initial_backoff.count()) / 1000.0}}},
        {"stereo",
         {{"kind", "oracle"}, {"scale", c.stereo.corruption.scale}, {"noise_sigma", c.stereo.corruption.noise_sigma}}},
        {"refiner", {{"kind", c.refiner.kind == RefinerSpec::Kind::Identity ? "identity" : "blur"}, {"sigma", c.refiner.sigma}}},
        {"trajectory", traj},
        {"start_frame", c.start_frame},
        {"output", {{"scene", c.output.scene}, {"report", c.output.report}, {"dir", c.output.dir}}},
    };
}

Components make_components(const PipelineConfig& c) {
    Components out;
    out.world = std::make_shared<SyntheticWorld>(make_synthetic_world(c.world));
    if (c.completer.kind == CompleterSpec::Kind::Oracle)
        out.completer = oracle_completer(out.world, c.expansion.render);
    else
        out.completer = remote_completer(c.completer.endpoint, c.completer.timeout_seconds, c.completer.retry);
    out.stereo = oracle_stereo(out.world, c.stereo.corruption, c.expansion.render);
    out.refiner = c.refiner.kind == RefinerSpec::Kind::Identity ? identity_refiner() : blur_refiner(c.refiner.sigma);
    return out;
}

} // namespace scene_forge
