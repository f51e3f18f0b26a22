/* SPDX-FileCopyrightText: 2026 scene-forge authors */
/* SPDX-License-Identifier: Apache-2.0 */

/* C interface to the scene-forge engine. Objects are opaque handles owned by the caller
 * and released with the matching *_free function. Every call returns an sf_status; on
 * failure the calling thread's last error holds a message and, where one applies, the
 * offending field path or stage tag. Strings returned through out-parameters are
 * allocated by the library and released with sf_string_free. */

#ifndef SCENE_FORGE_H
#define SCENE_FORGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SF_API __declspec(dllexport)
#else
#define SF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
    SF_OK = 0,
    SF_ERR_SHAPE = 1,
    SF_ERR_PARAMETER = 2,
    SF_ERR_EMPTY_INPUT = 3,
    SF_ERR_DEGENERATE_DEPTH = 4,
    SF_ERR_CONFIG = 5,
    SF_ERR_IO = 6,
    SF_ERR_PROTOCOL = 7,
    SF_ERR_TRANSPORT = 8,
    SF_ERR_TIMEOUT = 9,
    SF_ERR_STAGE = 10,
    SF_ERR_INVARIANT = 11,
    SF_ERR_INTERNAL = 100
} sf_status;

typedef struct sf_config sf_config;
typedef struct sf_scene sf_scene;

SF_API const char* sf_version(void);
/* Short lowercase name of a status, e.g. "config". */
SF_API const char* sf_status_name(sf_status status);
SF_API const char* sf_last_error_message(void);
/* Field path or stage tag of the last error; empty when none applies. */
SF_API const char* sf_last_error_where(void);
SF_API void sf_string_free(char* s);

/* Caps worker threads for the rest of the process; 0 restores the default. */
SF_API sf_status sf_set_threads(int threads);

SF_API sf_status sf_config_load(const char* path, sf_config** out);
SF_API sf_status sf_config_parse(const char* json_text, sf_config** out);
SF_API sf_status sf_config_set_seed(sf_config* config, uint64_t seed);
/* Effective config with all defaults filled in. */
SF_API sf_status sf_config_to_json(const sf_config* config, char** out_json);
/* One of "scene", "report", "dir" from the config's output section. */
SF_API sf_status sf_config_output_path(const sf_config* config, const char* key, char** out_path);
SF_API void sf_config_free(sf_config* config);

SF_API sf_status sf_scene_load(const char* path, sf_scene** out);
SF_API sf_status sf_scene_save(const sf_scene* scene, const char* path);
SF_API sf_status sf_scene_size(const sf_scene* scene, size_t* out_count);
SF_API void sf_scene_free(sf_scene* scene);

/* Synthetic ground-truth world and its PNG render at the reference pose. */
SF_API sf_status sf_world(const sf_config* config, sf_scene** out_scene, const char* image_path);
/* Initial scene from an input PNG. */
SF_API sf_status sf_init(const sf_config* config, const char* image_path, sf_scene** out_scene);
/* Runs the expansion schedule. The report JSON is returned even when a stage fails, in
 * which case the status is SF_ERR_STAGE and the scene is the last consistent one. */
SF_API sf_status sf_expand(const sf_config* config, const sf_scene* scene, sf_scene** out_scene, char** out_report_json);
/* Numbered color, depth and alpha PNGs along the configured trajectory. */
SF_API sf_status sf_render(const sf_config* config, const sf_scene* scene, const char* out_dir);
/* Metric report JSON for two frame directories; pose files may both be NULL. */
SF_API sf_status sf_eval(const char* pred_dir, const char* gt_dir, const char* pred_poses, const char* gt_poses,
                         char** out_report_json);
SF_API sf_status sf_make_pairs(const sf_config* config, const sf_scene* scene, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
