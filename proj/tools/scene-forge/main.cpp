// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include <scene_forge/scene_forge.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;
constexpr int kExitIo = 4;

int exit_code_for(sf_status s) {
    switch (s) {
    case SF_OK: return 0;
    case SF_ERR_CONFIG: return kExitConfig;
    case SF_ERR_IO: return kExitIo;
    default: return kExitStage;
    }
}

// Thrown to unwind to main with an error already formatted.
struct Failure {
    int exit_code;
    nlohmann::json error;
};

[[noreturn]] void raise(sf_status s) {
    nlohmann::json e = {{"code", sf_status_name(s)}, {"message", sf_last_error_message()}};
    if (*sf_last_error_where()) e["where"] = sf_last_error_where();
    throw Failure{exit_code_for(s), e};
}

void check(sf_status s) {
    if (s != SF_OK) raise(s);
}

struct ConfigDeleter {
    void operator()(sf_config* c) const { sf_config_free(c); }
};
struct SceneDeleter {
    void operator()(sf_scene* s) const { sf_scene_free(s); }
};
using ConfigPtr = std::unique_ptr<sf_config, ConfigDeleter>;
using ScenePtr = std::unique_ptr<sf_scene, SceneDeleter>;

struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { sf_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    bool verbose = false;
};

ConfigPtr load_config(const Globals& g) {
    sf_config* c = nullptr;
    check(sf_config_load(g.config.c_str(), &c));
    ConfigPtr out(c);
    if (g.seed) check(sf_config_set_seed(out.get(), *g.seed));
    return out;
}

std::string output_path(const sf_config* c, const char* key) {
    OwnedString s;
    check(sf_config_output_path(c, key, &s.p));
    return s.str();
}

ScenePtr load_scene(const std::string& path) {
    sf_scene* s = nullptr;
    check(sf_scene_load(path.c_str(), &s));
    return ScenePtr(s);
}

void save_scene(const sf_scene* s, const std::string& path, bool verbose) {
    check(sf_scene_save(s, path.c_str()));
    if (verbose) {
        size_t n = 0;
        sf_scene_size(s, &n);
        std::cerr << "wrote " << path << " (" << n << " gaussians)\n";
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text << "\n";
    if (!out) throw Failure{kExitIo, {{"code", "io"}, {"message", "cannot write " + path}}};
}

std::string or_default(const std::string& v, const std::string& fallback) { return v.empty() ? fallback : v; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Progressive single-image to 3D scene expansion", "scene-forge"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Override the config seed");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--verbose,-v", g.verbose, "Progress on stderr");

    std::string world_scene, world_image;
    auto* world = app.add_subcommand("world", "Save the synthetic world and its reference view");
    world->add_option("--out", world_scene, "World scene path (default: output.scene)");
    world->add_option("--image", world_image, "Reference view PNG (default: <output.dir>/reference.png)");

    std::string init_image, init_out;
    auto* init = app.add_subcommand("init", "Build the initial scene from one image");
    init->add_option("image", init_image, "Input PNG")->required();
    init->add_option("--out", init_out, "Scene path (default: output.scene)");

    std::string expand_scene, expand_out, expand_report;
    auto* expand = app.add_subcommand("expand", "Run the expansion schedule");
    expand->add_option("scene", expand_scene, "Input scene PLY")->required();
    expand->add_option("--out", expand_out, "Output scene (default: output.scene)");
    expand->add_option("--report", expand_report, "Report JSON (default: output.report)");

    std::string render_scene, render_dir;
    auto* render = app.add_subcommand("render", "Render the configured trajectory to PNGs");
    render->add_option("scene", render_scene, "Scene PLY")->required();
    render->add_option("--out-dir", render_dir, "Output directory (default: output.dir)");

    std::string eval_pred, eval_gt, eval_pred_poses, eval_gt_poses, eval_out;
    auto* eval = app.add_subcommand("eval", "PSNR/SSIM and camera error between two frame directories");
    eval->add_option("pred", eval_pred, "Predicted frames")->required();
    eval->add_option("gt", eval_gt, "Ground-truth frames")->required();
    auto* pp = eval->add_option("--pred-poses", eval_pred_poses, "Predicted trajectory JSON");
    auto* gp = eval->add_option("--gt-poses", eval_gt_poses, "Ground-truth trajectory JSON");
    pp->needs(gp);
    gp->needs(pp);
    eval->add_option("--out", eval_out, "Also write the report here");

    std::string pairs_scene, pairs_dir;
    auto* pairs = app.add_subcommand("make-pairs", "Render an incomplete/complete training pair");
    pairs->add_option("scene", pairs_scene, "Full scene PLY")->required();
    pairs->add_option("--out-dir", pairs_dir, "Output directory (default: output.dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        nlohmann::json err = {{"error", {{"code", "config"}, {"message", e.what()}, {"where", "argv"}}}};
        std::cerr << err.dump() << "\n";
        return kExitConfig;
    }

    try {
        check(sf_set_threads(g.threads));
        ConfigPtr cfg = load_config(g);
        const sf_config* c = cfg.get();
        if (g.verbose) std::cerr << "scene-forge " << sf_version() << "\n";

        if (world->parsed()) {
            const std::string dir = output_path(c, "dir");
            std::filesystem::create_directories(dir);
            const std::string image = or_default(world_image, dir + "/reference.png");
            sf_scene* s = nullptr;
            check(sf_world(c, &s, image.c_str()));
            ScenePtr scene(s);
            save_scene(scene.get(), or_default(world_scene, output_path(c, "scene")), g.verbose);
        } else if (init->parsed()) {
            sf_scene* s = nullptr;
            check(sf_init(c, init_image.c_str(), &s));
            ScenePtr scene(s);
            save_scene(scene.get(), or_default(init_out, output_path(c, "scene")), g.verbose);
        } else if (expand->parsed()) {
            ScenePtr in = load_scene(expand_scene);
            sf_scene* s = nullptr;
            OwnedString report;
            const sf_status st = sf_expand(c, in.get(), &s, &report.p);
            ScenePtr out(s);
            if (report.p) {
                write_text(or_default(expand_report, output_path(c, "report")), report.str());
                if (g.verbose) std::cerr << report.str() << "\n";
            }
            // A failed stage still leaves the last consistent scene worth keeping.
            if (out) save_scene(out.get(), or_default(expand_out, output_path(c, "scene")), g.verbose);
            check(st);
        } else if (render->parsed()) {
            ScenePtr scene = load_scene(render_scene);
            check(sf_render(c, scene.get(), or_default(render_dir, output_path(c, "dir")).c_str()));
        } else if (eval->parsed()) {
            OwnedString report;
            check(sf_eval(eval_pred.c_str(), eval_gt.c_str(), eval_pred_poses.empty() ? nullptr : eval_pred_poses.c_str(),
                          eval_gt_poses.empty() ? nullptr : eval_gt_poses.c_str(), &report.p));
            std::cout << report.str() << "\n";
            if (!eval_out.empty()) write_text(eval_out, report.str());
        } else if (pairs->parsed()) {
            ScenePtr scene = load_scene(pairs_scene);
            check(sf_make_pairs(c, scene.get(), or_default(pairs_dir, output_path(c, "dir")).c_str()));
        }
    } catch (const Failure& f) {
        std::cerr << nlohmann::json{{"error", f.error}, {"exit_code", f.exit_code}}.dump() << "\n";
        return f.exit_code;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", {{"code", "io"}, {"message", e.what()}}}, {"exit_code", kExitIo}}.dump() << "\n";
        return kExitIo;
    }
    return 0;
}
