// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "wire.hpp"

#include "codec.hpp"
#include "error.hpp"

namespace scene_forge {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    fail(ErrorCode::Protocol, path + ": " + what, path);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(path.empty() ? key : path + "." + key, "missing field");
    return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const json& j, const std::string& path) {
    if (!j.is_number()) bad(path, "expected a number");
    return j.get<double>();
}

std::vector<double> numbers(const json& j, std::size_t count, const std::string& path) {
    if (!j.is_array() || j.size() != count) bad(path, "expected an array of " + std::to_string(count) + " numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Image decode_image(const json& j, int channels, const std::string& path) {
    if (!j.is_string()) bad(path, "expected a base64 PNG string");
    try {
        return decode_png8(base64_decode(j.get<std::string>()), channels);
    } catch (const Error& e) {
        bad(path, e.what());
    }
}

std::vector<Image> decode_images(const json& j, int channels, const std::string& path) {
    if (!j.is_array()) bad(path, "expected an array");
    std::vector<Image> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(decode_image(j[i], channels, path + "[" + std::to_string(i) + "]"));
    return out;
}

} // namespace

json intrinsics_to_json(const CameraIntrinsics& k) {
    return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

json pose_to_json(const CameraPose& pose) {
    json rot = json::array(), t = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rot.push_back(pose.rotation(r, c));
    for (int r = 0; r < 3; ++r) t.push_back(pose.translation[r]);
    return {{"rotation", rot}, {"translation", t}};
}

json trajectory_to_json(const Trajectory& trajectory) {
    json poses = json::array();
    for (const auto& p : trajectory.poses) poses.push_back(pose_to_json(p));
    return {{"intrinsics", intrinsics_to_json(trajectory.intrinsics)}, {"poses", poses}};
}

CameraIntrinsics intrinsics_from_json(const json& j, const std::string& path) {
    CameraIntrinsics k;
    k.fx = number(field(j, "fx", path), join(path, "fx"));
    k.fy = number(field(j, "fy", path), join(path, "fy"));
    k.cx = number(field(j, "cx", path), join(path, "cx"));
    k.cy = number(field(j, "cy", path), join(path, "cy"));
    const json& w = field(j, "width", path);
    const json& h = field(j, "height", path);
    if (!w.is_number_integer()) bad(join(path, "width"), "expected an integer");
    if (!h.is_number_integer()) bad(join(path, "height"), "expected an integer");
    k.width = w.get<int>();
    k.height = h.get<int>();
    try {
        k.validate();
    } catch (const Error& e) {
        bad(path, e.what());
    }
    return k;
}

CameraPose pose_from_json(const json& j, const std::string& path) {
    CameraPose pose;
    const auto r = numbers(field(j, "rotation", path), 9, join(path, "rotation"));
    const auto t = numbers(field(j, "translation", path), 3, join(path, "translation"));
    for (int row = 0; row < 3; ++row) {
        for (int c = 0; c < 3; ++c) pose.rotation(row, c) = r[3 * row + c];
        pose.translation[row] = t[row];
    }
    try {
        pose.validate();
    } catch (const Error& e) {
        bad(join(path, "rotation"), e.what());
    }
    return pose;
}

Trajectory trajectory_from_json(const json& j, const std::string& path) {
    Trajectory traj;
    traj.intrinsics = intrinsics_from_json(field(j, "intrinsics", path), join(path, "intrinsics"));
    const std::string poses_path = join(path, "poses");
    const json& poses = field(j, "poses", path);
    if (!poses.is_array() || poses.empty()) bad(poses_path, "expected a non-empty array");
    for (std::size_t i = 0; i < poses.size(); ++i)
        traj.poses.push_back(pose_from_json(poses[i], poses_path + "[" + std::to_string(i) + "]"));
    return traj;
}

json encode_completion_request(const CompletionRequest& request) {
    json frames = json::array(), alphas = json::array();
    for (const auto& f : request.frames) frames.push_back(base64_encode(encode_png8(f)));
    for (const auto& a : request.alphas) alphas.push_back(base64_encode(encode_png8(a)));
    return {{"trajectory", trajectory_to_json(request.trajectory)},
            {"frames", frames},
            {"alphas", alphas},
            {"request_id", request.request_id}};
}

CompletionRequest decode_completion_request(const json& body) {
    CompletionRequest req;
    if (!body.is_object()) bad("$", "expected a JSON object");
    req.trajectory = trajectory_from_json(field(body, "trajectory", ""), "trajectory");
    req.frames = decode_images(field(body, "frames", ""), 3, "frames");
    req.alphas = decode_images(field(body, "alphas", ""), 1, "alphas");
    const json& id = field(body, "request_id", "");
    if (!id.is_string()) bad("request_id", "expected a string");
    req.request_id = id.get<std::string>();
    const std::size_t n = req.trajectory.size();
    if (req.frames.size() != n) bad("frames", "expected " + std::to_string(n) + " frames");
    if (req.alphas.size() != n) bad("alphas", "expected " + std::to_string(n) + " alpha maps");
    for (std::size_t i = 0; i < n; ++i) {
        const auto& k = req.trajectory.intrinsics;
        if (req.frames[i].width != k.width || req.frames[i].height != k.height)
            bad("frames[" + std::to_string(i) + "]", "dimensions do not match the intrinsics");
        if (req.alphas[i].width != k.width || req.alphas[i].height != k.height)
            bad("alphas[" + std::to_string(i) + "]", "dimensions do not match the intrinsics");
    }
    return req;
}

json encode_completion_response(const std::vector<Image>& frames, const std::string& request_id) {
    json out = json::array();
    for (const auto& f : frames) out.push_back(base64_encode(encode_png8(f)));
    return {{"frames", out}, {"request_id", request_id}};
}

std::vector<Image> decode_completion_response(const json& body, std::size_t expected_frames, int width, int height,
                                              const std::string& request_id) {
    if (!body.is_object()) bad("$", "expected a JSON object");
    const json& id = field(body, "request_id", "");
    if (!id.is_string() || id.get<std::string>() != request_id) bad("request_id", "does not echo the request");
    const json& frames = field(body, "frames", "");
    if (!frames.is_array() || frames.size() != expected_frames)
        bad("frames", "expected " + std::to_string(expected_frames) + " frames");
    std::vector<Image> out = decode_images(frames, 3, "frames");
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i].width != width || out[i].height != height)
            bad("frames[" + std::to_string(i) + "]", "dimensions do not match the request");
    return out;
}

} // namespace scene_forge
