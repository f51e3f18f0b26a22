// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "config.hpp"
#include "eval.hpp"

// File-level operations behind the command line. Each takes a parsed config and works
// on paths, so the C API only has to marshal arguments.
namespace scene_forge {

namespace fs = std::filesystem;

/// frame_0000.png etc. in `dir`, sorted by name.
std::vector<fs::path> list_frames(const fs::path& dir, const std::string& prefix = "frame_");
std::vector<Image> read_frames(const fs::path& dir);

/// Writes frame_NNNN.png, depth_NNNN.png (16-bit millimetres), alpha_NNNN.png and trajectory.json.
void write_renders(const fs::path& dir, const std::vector<RenderOutput>& renders, const Trajectory& trajectory);

Trajectory load_trajectory(const fs::path& path);
void save_trajectory(const fs::path& path, const Trajectory& trajectory);

/// The synthetic world scene and its render at the configured reference pose.
std::pair<GaussianScene, Image> command_world(const PipelineConfig& config);

InitResult command_init(const PipelineConfig& config, const Image& image);

PipelineResult command_expand(const PipelineConfig& config, GaussianScene scene);

/// The configured trajectory, starting at the reference pose.
Trajectory command_trajectory(const PipelineConfig& config, const GaussianScene& scene);

void command_render(const PipelineConfig& config, const GaussianScene& scene, const fs::path& out_dir);

MetricReport command_eval(const fs::path& pred_dir, const fs::path& gt_dir,
                          const std::optional<fs::path>& pred_poses = std::nullopt,
                          const std::optional<fs::path>& gt_poses = std::nullopt);

/// Writes x/ (ground truth) and y/ (incomplete, with alphas) under `out_dir`.
void command_make_pairs(const PipelineConfig& config, const GaussianScene& scene, const fs::path& out_dir);

} // namespace scene_forge
