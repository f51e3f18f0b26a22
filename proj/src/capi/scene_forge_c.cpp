// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "scene_forge/scene_forge.h"

#include <tbb/global_control.h>

#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <new>
#include <string>

#include "codec.hpp"
#include "commands.hpp"
#include "ply.hpp"

struct sf_config {
    scene_forge::PipelineConfig value;
};

struct sf_scene {
    scene_forge::GaussianScene value;
};

namespace {

using scene_forge::Error;
using scene_forge::ErrorCode;

thread_local std::string g_message;
thread_local std::string g_where;

std::mutex g_threads_mutex;
std::unique_ptr<tbb::global_control> g_threads;

sf_status record(sf_status status, std::string message, std::string where = {}) {
    g_message = std::move(message);
    g_where = std::move(where);
    return status;
}

template <typename F>
sf_status guarded(F&& f) {
    g_message.clear();
    g_where.clear();
    try {
        return f();
    } catch (const Error& e) {
        return record(static_cast<sf_status>(e.code()), e.what(), e.where());
    } catch (const std::bad_alloc&) {
        return record(SF_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return record(SF_ERR_INTERNAL, e.what());
    }
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

sf_status null_arg(const char* name) { return record(SF_ERR_PARAMETER, std::string("null argument: ") + name, name); }

} // namespace

extern "C" {

const char* sf_version(void) { return "1.0.0"; }

const char* sf_status_name(sf_status status) {
    if (status == SF_OK) return "ok";
    if (status == SF_ERR_INTERNAL) return "internal";
    if (status < SF_ERR_SHAPE || status > SF_ERR_INVARIANT) return "unknown";
    return scene_forge::to_string(static_cast<ErrorCode>(status)).data();
}

const char* sf_last_error_message(void) { return g_message.c_str(); }
const char* sf_last_error_where(void) { return g_where.c_str(); }
void sf_string_free(char* s) { std::free(s); }

sf_status sf_set_threads(int threads) {
    return guarded([&] {
        if (threads < 0) return record(SF_ERR_PARAMETER, "thread count must be non-negative", "threads");
        std::lock_guard lock(g_threads_mutex);
        g_threads.reset();
        if (threads > 0)
            g_threads = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                              static_cast<std::size_t>(threads));
        return SF_OK;
    });
}

sf_status sf_config_load(const char* path, sf_config** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new sf_config{scene_forge::load_config(path)};
        return SF_OK;
    });
}

sf_status sf_config_parse(const char* json_text, sf_config** out) {
    if (!json_text) return null_arg("json_text");
    if (!out) return null_arg("out");
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(json_text);
        } catch (const nlohmann::json::parse_error& e) {
            return record(SF_ERR_CONFIG, std::string("config is not valid JSON: ") + e.what(), "$");
        }
        *out = new sf_config{scene_forge::parse_config(j)};
        return SF_OK;
    });
}

sf_status sf_config_set_seed(sf_config* config, uint64_t seed) {
    if (!config) return null_arg("config");
    config->value.set_seed(seed);
    return SF_OK;
}

sf_status sf_config_to_json(const sf_config* config, char** out_json) {
    if (!config) return null_arg("config");
    if (!out_json) return null_arg("out_json");
    return guarded([&] {
        *out_json = dup(scene_forge::config_to_json(config->value).dump(2));
        return SF_OK;
    });
}

sf_status sf_config_output_path(const sf_config* config, const char* key, char** out_path) {
    if (!config) return null_arg("config");
    if (!key) return null_arg("key");
    if (!out_path) return null_arg("out_path");
    return guarded([&] {
        const auto& o = config->value.output;
        const std::string k = key;
        if (k == "scene") *out_path = dup(o.scene);
        else if (k == "report") *out_path = dup(o.report);
        else if (k == "dir") *out_path = dup(o.dir);
        else return record(SF_ERR_PARAMETER, "unknown output key '" + k + "'", "key");
        return SF_OK;
    });
}

void sf_config_free(sf_config* config) { delete config; }

sf_status sf_scene_load(const char* path, sf_scene** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new sf_scene{scene_forge::load_scene(path)};
        return SF_OK;
    });
}

sf_status sf_scene_save(const sf_scene* scene, const char* path) {
    if (!scene) return null_arg("scene");
    if (!path) return null_arg("path");
    return guarded([&] {
        scene_forge::save_scene(path, scene->value);
        return SF_OK;
    });
}

sf_status sf_scene_size(const sf_scene* scene, size_t* out_count) {
    if (!scene) return null_arg("scene");
    if (!out_count) return null_arg("out_count");
    *out_count = scene->value.size();
    return SF_OK;
}

void sf_scene_free(sf_scene* scene) { delete scene; }

sf_status sf_world(const sf_config* config, sf_scene** out_scene, const char* image_path) {
    if (!config) return null_arg("config");
    if (!out_scene) return null_arg("out_scene");
    return guarded([&] {
        auto [scene, view] = scene_forge::command_world(config->value);
        if (image_path) scene_forge::write_file(image_path, scene_forge::encode_png8(view));
        *out_scene = new sf_scene{std::move(scene)};
        return SF_OK;
    });
}

sf_status sf_init(const sf_config* config, const char* image_path, sf_scene** out_scene) {
    if (!config) return null_arg("config");
    if (!image_path) return null_arg("image_path");
    if (!out_scene) return null_arg("out_scene");
    return guarded([&] {
        scene_forge::Image image;
        try {
            image = scene_forge::decode_png8(scene_forge::read_file(image_path), 3);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Io) throw;
            return record(SF_ERR_IO, std::string(image_path) + ": " + e.what());
        }
        *out_scene = new sf_scene{scene_forge::command_init(config->value, image).scene};
        return SF_OK;
    });
}

sf_status sf_expand(const sf_config* config, const sf_scene* scene, sf_scene** out_scene, char** out_report_json) {
    if (!config) return null_arg("config");
    if (!scene) return null_arg("scene");
    if (!out_scene) return null_arg("out_scene");
    return guarded([&] {
        scene_forge::PipelineResult r = scene_forge::command_expand(config->value, scene->value);
        if (out_report_json) *out_report_json = dup(r.report.to_json().dump(2));
        *out_scene = new sf_scene{std::move(r.scene)};
        if (!r.report.ok()) return record(SF_ERR_STAGE, r.report.error, "stage");
        return SF_OK;
    });
}

sf_status sf_render(const sf_config* config, const sf_scene* scene, const char* out_dir) {
    if (!config) return null_arg("config");
    if (!scene) return null_arg("scene");
    if (!out_dir) return null_arg("out_dir");
    return guarded([&] {
        scene_forge::command_render(config->value, scene->value, out_dir);
        return SF_OK;
    });
}

sf_status sf_eval(const char* pred_dir, const char* gt_dir, const char* pred_poses, const char* gt_poses,
                  char** out_report_json) {
    if (!pred_dir) return null_arg("pred_dir");
    if (!gt_dir) return null_arg("gt_dir");
    if (!out_report_json) return null_arg("out_report_json");
    return guarded([&] {
        std::optional<std::filesystem::path> pp, gp;
        if (pred_poses) pp = pred_poses;
        if (gt_poses) gp = gt_poses;
        *out_report_json = dup(scene_forge::command_eval(pred_dir, gt_dir, pp, gp).to_json().dump(2));
        return SF_OK;
    });
}

sf_status sf_make_pairs(const sf_config* config, const sf_scene* scene, const char* out_dir) {
    if (!config) return null_arg("config");
    if (!scene) return null_arg("scene");
    if (!out_dir) return null_arg("out_dir");
    return guarded([&] {
        scene_forge::command_make_pairs(config->value, scene->value, out_dir);
        return SF_OK;
    });
}

} // extern "C"
