// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "trajectory.hpp"

namespace scene_forge {

// JSON forms shared by the completer wire protocol and the CLI files.
nlohmann::json intrinsics_to_json(const CameraIntrinsics& k);
nlohmann::json pose_to_json(const CameraPose& pose);
nlohmann::json trajectory_to_json(const Trajectory& trajectory);

/// Decoders throw ErrorCode::Protocol with the offending field path (rooted at `path`).
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j, const std::string& path);
CameraPose pose_from_json(const nlohmann::json& j, const std::string& path);
Trajectory trajectory_from_json(const nlohmann::json& j, const std::string& path);

struct CompletionRequest {
    Trajectory trajectory;
    std::vector<Image> frames;
    std::vector<Image> alphas;
    std::string request_id;
};

nlohmann::json encode_completion_request(const CompletionRequest& request);
CompletionRequest decode_completion_request(const nlohmann::json& body);

nlohmann::json encode_completion_response(const std::vector<Image>& frames, const std::string& request_id);
/// Validates frame count, dimensions and the echoed request id.
std::vector<Image> decode_completion_response(const nlohmann::json& body, std::size_t expected_frames, int width,
                                              int height, const std::string& request_id);

} // namespace scene_forge
