// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cstdio>

#include "codec.hpp"
#include "error.hpp"
#include "wire.hpp"

namespace scene_forge {
namespace {

std::string numbered(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04zu.png", prefix, i);
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<RenderOutput> render_trajectory(const GaussianScene& scene, const Trajectory& traj, const RenderSettings& rs) {
    std::vector<RenderOutput> out(traj.size());
    tbb::parallel_for(std::size_t{0}, traj.size(),
                      [&](std::size_t i) { out[i] = render(scene, traj.intrinsics, traj.poses[i], rs); });
    return out;
}

void write_images(const fs::path& dir, const char* prefix, const std::vector<Image>& images) {
    ensure_dir(dir);
    for (std::size_t i = 0; i < images.size(); ++i) write_file(dir / numbered(prefix, i), encode_png8(images[i]));
}

} // namespace

std::vector<fs::path> list_frames(const fs::path& dir, const std::string& prefix) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) fail(ErrorCode::Io, "not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".png") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Image> read_frames(const fs::path& dir) {
    std::vector<Image> out;
    for (const auto& p : list_frames(dir)) {
        try {
            out.push_back(decode_png8(read_file(p), 3));
        } catch (const Error& e) {
            fail(ErrorCode::Io, p.string() + ": " + e.what());
        }
    }
    return out;
}

void write_renders(const fs::path& dir, const std::vector<RenderOutput>& renders, const Trajectory& trajectory) {
    ensure_dir(dir);
    for (std::size_t i = 0; i < renders.size(); ++i) {
        const RenderOutput& r = renders[i];
        write_file(dir / numbered("frame_", i), encode_png8(r.color));
        write_file(dir / numbered("alpha_", i), encode_png8(r.alpha));
        write_file(dir / numbered("depth_", i), encode_png16(depth_to_millimetres(r.depth), r.depth.width, r.depth.height));
    }
    save_trajectory(dir / "trajectory.json", trajectory);
}

Trajectory load_trajectory(const fs::path& path) {
    const Bytes bytes = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::Io, path.string() + " is not valid JSON: " + e.what());
    }
    try {
        return trajectory_from_json(j, "trajectory");
    } catch (const Error& e) {
        fail(ErrorCode::Io, path.string() + ": " + e.what(), e.where());
    }
}

void save_trajectory(const fs::path& path, const Trajectory& trajectory) {
    const std::string text = trajectory_to_json(trajectory).dump(1) + "\n";
    write_file(path, Bytes(text.begin(), text.end()));
}

std::pair<GaussianScene, Image> command_world(const PipelineConfig& config) {
    SyntheticWorld world = make_synthetic_world(config.world);
    Image view = render(world.scene, config.intrinsics, config.reference_pose, config.expansion.render).color;
    return {std::move(world.scene), std::move(view)};
}

InitResult command_init(const PipelineConfig& config, const Image& image) {
    Components c = make_components(config);
    return init_scene(image, *c.stereo, config.intrinsics, config.reference_pose);
}

PipelineResult command_expand(const PipelineConfig& config, GaussianScene scene) {
    Components c = make_components(config);
    // The scene was fit to the input view, so its render there stands in for the input image.
    const Image reference = render(scene, config.intrinsics, config.reference_pose, config.expansion.render).color;
    return expand_scene(std::move(scene), config.reference_pose, reference, config.intrinsics, config.expansion,
                        *c.completer, *c.stereo, c.refiner.get());
}

Trajectory command_trajectory(const PipelineConfig& config, const GaussianScene& scene) {
    const StageSpec& st = config.trajectory.stage;
    if (st.kind == StageSpec::Kind::ZoomOut)
        return plan_zoom_out(config.reference_pose, st.travel, st.frames, config.intrinsics);
    Vec3 pivot;
    if (config.trajectory.pivot) pivot = *config.trajectory.pivot;
    else if (config.expansion.pivot) pivot = *config.expansion.pivot;
    else if (!scene.empty()) pivot = scene_centroid(scene);
    else fail(ErrorCode::Config, "orbit needs a pivot for an empty scene", "trajectory.pivot");
    return plan_orbit(config.reference_pose, pivot, st.angle_deg, st.frames, config.intrinsics);
}

void command_render(const PipelineConfig& config, const GaussianScene& scene, const fs::path& out_dir) {
    const Trajectory traj = command_trajectory(config, scene);
    write_renders(out_dir, render_trajectory(scene, traj, config.expansion.render), traj);
}

MetricReport command_eval(const fs::path& pred_dir, const fs::path& gt_dir, const std::optional<fs::path>& pred_poses,
                          const std::optional<fs::path>& gt_poses) {
    const std::vector<Image> pred = read_frames(pred_dir);
    const std::vector<Image> gt = read_frames(gt_dir);
    if (pred.empty()) fail(ErrorCode::Io, "no frames in " + pred_dir.string());
    if (pred.size() != gt.size())
        fail(ErrorCode::Shape, "frame counts differ: " + std::to_string(pred.size()) + " vs " + std::to_string(gt.size()));
    MetricReport report = evaluate_frames(pred, gt);
    if (pred_poses.has_value() != gt_poses.has_value())
        fail(ErrorCode::Parameter, "camera error needs both pose files");
    if (pred_poses) report.camera = camera_error(load_trajectory(*pred_poses).poses, load_trajectory(*gt_poses).poses);
    return report;
}

void command_make_pairs(const PipelineConfig& config, const GaussianScene& scene, const fs::path& out_dir) {
    const Trajectory traj = command_trajectory(config, scene);
    if (config.start_frame < 0 || std::size_t(config.start_frame) >= traj.size())
        fail(ErrorCode::Parameter, "start frame out of range", "start_frame");
    const TrainingPair pair = make_training_pair(scene, traj, config.start_frame, config.expansion.render);
    write_images(out_dir / "x", "frame_", pair.ground_truth);
    write_images(out_dir / "y", "frame_", pair.incomplete);
    write_images(out_dir / "y", "alpha_", pair.incomplete_alpha);
    save_trajectory(out_dir / "trajectory.json", traj);
}

} // namespace scene_forge
