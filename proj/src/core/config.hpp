// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "expand.hpp"
#include "interfaces.hpp"

namespace scene_forge {

inline constexpr int kSchemaVersion = 1;

struct CompleterSpec {
    enum class Kind { Oracle, Remote };
    Kind kind = Kind::Oracle;
    std::string endpoint;
    double timeout_seconds = 600.0;
    RetryPolicy retry;
};

struct StereoSpec {
    StereoCorruption corruption; // oracle only
};

struct RefinerSpec {
    enum class Kind { Identity, Blur };
    Kind kind = Kind::Identity;
    double sigma = 1.0;
};

/// A planned path for render and make-pairs, starting at the reference pose.
struct TrajectorySpec {
    StageSpec stage = StageSpec::orbit(360.0);
    std::optional<Vec3> pivot; // defaults to the expansion pivot, then the scene centroid
};

struct OutputSpec {
    std::string scene = "scene.ply";
    std::string report = "report.json";
    std::string dir = "out";
};

struct PipelineConfig {
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 42;
    WorldSpec world;
    CameraIntrinsics intrinsics{300.0, 300.0, 179.5, 119.5, 360, 240};
    CameraPose reference_pose = SyntheticWorld::default_reference_pose();
    ExpansionConfig expansion;
    CompleterSpec completer;
    StereoSpec stereo;
    RefinerSpec refiner;
    TrajectorySpec trajectory;
    int start_frame = 0;
    OutputSpec output;

    /// Propagates the master seed into the seeded sections.
    void set_seed(std::uint64_t s);
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw ErrorCode::Config
/// with the offending field path in Error::where().
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
/// Full config including defaults; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const PipelineConfig& config);

struct Components {
    std::shared_ptr<const SyntheticWorld> world;
    std::unique_ptr<ViewCompleter> completer;
    std::unique_ptr<DenseStereo> stereo;
    std::unique_ptr<ImageRefiner> refiner;
};

/// Instantiates the configured stages around the synthetic world the oracles render.
Components make_components(const PipelineConfig& config);

} // namespace scene_forge
