// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <json.hpp>
#include <scene_forge/scene_forge.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sf_capi_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

json small_config() {
    return {{"schema_version", 1},
            {"world", {{"target_gaussians", 3000}}},
            {"intrinsics", {{"fx", 40}, {"fy", 40}, {"cx", 23.5}, {"cy", 17.5}, {"width", 48}, {"height", 36}}},
            {"expansion",
             {{"schedule", json::array({{{"kind", "orbit"}, {"angle_deg", 30}, {"frames", 4}}})},
              {"keyframes", 2},
              {"stage_iters", 3},
              {"refine_iters", 2},
              {"refine_views", 2}}},
            {"trajectory", {{"kind", "orbit"}, {"angle_deg", 20}, {"frames", 3}}}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

struct Run {
    int exit_code;
    std::string err;
};

Run cli(const std::string& args, const fs::path& dir) {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + SF_CLI_PATH + "\" " + args + " 2>\"" + err.string() + "\" >/dev/null";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

} // namespace

TEST_CASE("status names and version") {
    CHECK(std::string(sf_version()).size() > 0);
    CHECK(std::string(sf_status_name(SF_OK)) == "ok");
    CHECK(std::string(sf_status_name(SF_ERR_CONFIG)) == "config");
    CHECK(sf_set_threads(0) == SF_OK);
    CHECK(sf_set_threads(-1) == SF_ERR_PARAMETER);
}

TEST_CASE("config handles") {
    sf_config* c = nullptr;
    CHECK(sf_config_parse("{\"schema_version\": 1, \"optim\": {\"lr_colour\": 1}}", &c) == SF_ERR_CONFIG);
    CHECK(c == nullptr);
    CHECK(std::string(sf_last_error_where()) == "optim.lr_colour");
    CHECK(sf_config_parse("not json", &c) == SF_ERR_CONFIG);
    CHECK(sf_config_parse(nullptr, &c) == SF_ERR_PARAMETER);

    REQUIRE(sf_config_parse(small_config().dump().c_str(), &c) == SF_OK);
    CHECK(sf_config_set_seed(c, 5) == SF_OK);
    char* text = nullptr;
    REQUIRE(sf_config_to_json(c, &text) == SF_OK);
    CHECK(json::parse(text)["seed"] == 5);
    sf_string_free(text);
    char* out = nullptr;
    REQUIRE(sf_config_output_path(c, "scene", &out) == SF_OK);
    CHECK(std::string(out) == "scene.ply");
    sf_string_free(out);
    CHECK(sf_config_output_path(c, "nope", &out) == SF_ERR_PARAMETER);
    sf_config_free(c);
    CHECK(sf_config_load("/nonexistent/config.json", &c) == SF_ERR_IO);
}

TEST_CASE("world, render, eval and expand through the C API") {
    TempDir tmp;
    sf_config* c = nullptr;
    REQUIRE(sf_config_parse(small_config().dump().c_str(), &c) == SF_OK);
    sf_scene* world = nullptr;
    const std::string image = (tmp.path / "input.png").string();
    REQUIRE(sf_world(c, &world, image.c_str()) == SF_OK);
    std::size_t n = 0;
    CHECK(sf_scene_size(world, &n) == SF_OK);
    CHECK(n > 1000);
    CHECK(fs::exists(image));

    sf_scene* init = nullptr;
    REQUIRE(sf_init(c, image.c_str(), &init) == SF_OK);
    CHECK(sf_scene_size(init, &n) == SF_OK);
    CHECK(n == 48 * 36);

    const std::string renders = (tmp.path / "renders").string();
    REQUIRE(sf_render(c, world, renders.c_str()) == SF_OK);
    CHECK(fs::exists(tmp.path / "renders" / "frame_0002.png"));
    CHECK(fs::exists(tmp.path / "renders" / "trajectory.json"));
    char* metrics = nullptr;
    REQUIRE(sf_eval(renders.c_str(), renders.c_str(), nullptr, nullptr, &metrics) == SF_OK);
    CHECK(json::parse(metrics)["psnr_mean"] == 99.0);
    sf_string_free(metrics);

    sf_scene* expanded = nullptr;
    char* report = nullptr;
    REQUIRE(sf_expand(c, init, &expanded, &report) == SF_OK);
    CHECK(json::parse(report)["stages"].size() == 1);
    sf_string_free(report);
    std::size_t grown = 0;
    sf_scene_size(expanded, &grown);
    CHECK(grown >= n);

    const std::string ply = (tmp.path / "x.ply").string();
    REQUIRE(sf_scene_save(expanded, ply.c_str()) == SF_OK);
    sf_scene* back = nullptr;
    REQUIRE(sf_scene_load(ply.c_str(), &back) == SF_OK);
    sf_scene_size(back, &n);
    CHECK(n == grown);

    const std::string pairs = (tmp.path / "pairs").string();
    REQUIRE(sf_make_pairs(c, world, pairs.c_str()) == SF_OK);
    CHECK(fs::exists(tmp.path / "pairs" / "x" / "frame_0000.png"));
    CHECK(fs::exists(tmp.path / "pairs" / "y" / "alpha_0000.png"));

    CHECK(sf_scene_load((tmp.path / "missing.ply").string().c_str(), &back) == SF_ERR_IO);
    for (sf_scene* s : {world, init, expanded, back}) sf_scene_free(s);
    sf_config_free(c);
}

TEST_CASE("command line exit codes") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "config.json";
    json j = small_config();
    j["expansion"]["schedule"] = json::array();
    spit(cfg, j.dump());
    const std::string base = "--config \"" + cfg.string() + "\" ";

    const fs::path scene = tmp.path / "world.ply";
    REQUIRE(cli(base + "world --out \"" + scene.string() + "\" --image \"" + (tmp.path / "ref.png").string() + "\"",
                tmp.path).exit_code == 0);
    const fs::path same = tmp.path / "same.ply";
    const fs::path report = tmp.path / "report.json";
    REQUIRE(cli(base + "expand \"" + scene.string() + "\" --out \"" + same.string() + "\" --report \"" +
                    report.string() + "\"",
                tmp.path)
                .exit_code == 0);
    CHECK(slurp(same) == slurp(scene));
    CHECK(json::parse(slurp(report))["stages"].empty());

    const fs::path a = tmp.path / "a", b = tmp.path / "b";
    REQUIRE(cli(base + "render \"" + scene.string() + "\" --out-dir \"" + a.string() + "\"", tmp.path).exit_code == 0);
    REQUIRE(cli(base + "render \"" + scene.string() + "\" --out-dir \"" + b.string() + "\"", tmp.path).exit_code == 0);
    const fs::path metrics = tmp.path / "metrics.json";
    REQUIRE(cli(base + "eval \"" + a.string() + "\" \"" + b.string() + "\" --out \"" + metrics.string() + "\"",
                tmp.path)
                .exit_code == 0);
    CHECK(json::parse(slurp(metrics))["psnr_mean"] == 99.0);

    const fs::path bad = tmp.path / "bad.json";
    spit(bad, R"({"schema_version": 1, "expansion": {"refine_t": 2}})");
    const Run r = cli("--config \"" + bad.string() + "\" world --out \"" + (tmp.path / "w.ply").string() + "\"", tmp.path);
    CHECK(r.exit_code == 2);
    const json err = json::parse(r.err);
    CHECK(err["error"]["code"] == "config");
    CHECK(err["error"]["where"] == "expansion.refine_t");
    CHECK(err["exit_code"] == 2);

    const Run missing = cli(base + "render \"" + (tmp.path / "none.ply").string() + "\"", tmp.path);
    CHECK(missing.exit_code == 4);
    CHECK(json::parse(missing.err)["error"]["code"] == "io");

    CHECK(cli(base + "frobnicate", tmp.path).exit_code == 2);
}
