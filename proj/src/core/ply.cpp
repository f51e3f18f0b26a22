// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "ply.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <sstream>
#include <string>

#include "error.hpp"

namespace scene_forge {
namespace {

constexpr const char* kVersion = "scene-forge-v1";
constexpr std::array<const char*, 14> kProperties = {
    "x", "y", "z", "red", "green", "blue", "opacity_logit", "log_scale_x", "log_scale_y", "log_scale_z",
    "quat_w", "quat_x", "quat_y", "quat_z"};
constexpr std::size_t kStride = kProperties.size() * 4;

void put_f32(std::uint8_t* out, float v) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) out[b] = std::uint8_t(bits >> (8 * b));
}

float get_f32(const std::uint8_t* in) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t(in[b]) << (8 * b);
    return std::bit_cast<float>(bits);
}

std::string header(std::size_t n) {
    std::ostringstream h;
    h << "ply\nformat binary_little_endian 1.0\ncomment " << kVersion << "\nelement vertex " << n << "\n";
    for (const char* p : kProperties) h << "property float " << p << "\n";
    h << "end_header\n";
    return h.str();
}

} // namespace

Bytes encode_ply(const GaussianScene& s) {
    const std::size_t n = s.size();
    const std::string head = header(n);
    Bytes out(head.size() + n * kStride);
    std::memcpy(out.data(), head.data(), head.size());
    std::uint8_t* p = out.data() + head.size();
    for (std::size_t i = 0; i < n; ++i) {
        float row[14] = {s.centers[3 * i],        s.centers[3 * i + 1],    s.centers[3 * i + 2],
                         s.colors[3 * i],         s.colors[3 * i + 1],     s.colors[3 * i + 2],
                         s.opacity_logits[i],     s.log_scales[3 * i],     s.log_scales[3 * i + 1],
                         s.log_scales[3 * i + 2], s.rotations[4 * i],      s.rotations[4 * i + 1],
                         s.rotations[4 * i + 2],  s.rotations[4 * i + 3]};
        for (float v : row) {
            put_f32(p, v);
            p += 4;
        }
    }
    return out;
}

GaussianScene decode_ply(const Bytes& bytes) {
    // The header is ASCII lines up to "end_header\n".
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        std::size_t end = pos;
        while (end < bytes.size() && bytes[end] != '\n') ++end;
        if (end >= bytes.size()) fail(ErrorCode::Io, "truncated PLY header", "header");
        std::string line(bytes.begin() + std::ptrdiff_t(pos), bytes.begin() + std::ptrdiff_t(end));
        pos = end + 1;
        return line;
    };
    auto expect = [&](const std::string& want) {
        std::string got = next_line();
        if (got != want) fail(ErrorCode::Io, "unexpected PLY header line '" + got + "', expected '" + want + "'", "header");
    };
    expect("ply");
    expect("format binary_little_endian 1.0");
    expect(std::string("comment ") + kVersion);
    std::string elem = next_line();
    const std::string prefix = "element vertex ";
    if (elem.rfind(prefix, 0) != 0) fail(ErrorCode::Io, "missing vertex element", "header");
    std::size_t n = 0;
    try {
        std::size_t used = 0;
        n = std::stoull(elem.substr(prefix.size()), &used);
        if (used != elem.size() - prefix.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        fail(ErrorCode::Io, "bad vertex count '" + elem + "'", "header");
    }
    for (const char* p : kProperties) expect(std::string("property float ") + p);
    expect("end_header");
    if ((bytes.size() - pos) / kStride < n || bytes.size() - pos != n * kStride)
        fail(ErrorCode::Io, "PLY body size does not match " + std::to_string(n) + " vertices", "body");

    GaussianScene s;
    s.resize(n);
    const std::uint8_t* p = bytes.data() + pos;
    for (std::size_t i = 0; i < n; ++i, p += kStride) {
        for (int k = 0; k < 3; ++k) {
            s.centers[3 * i + k] = get_f32(p + 4 * k);
            s.colors[3 * i + k] = get_f32(p + 4 * (3 + k));
            s.log_scales[3 * i + k] = get_f32(p + 4 * (7 + k));
        }
        s.opacity_logits[i] = get_f32(p + 4 * 6);
        for (int k = 0; k < 4; ++k) s.rotations[4 * i + k] = get_f32(p + 4 * (10 + k));
    }
    return s;
}

void save_scene(const std::filesystem::path& path, const GaussianScene& scene) { write_file(path, encode_ply(scene)); }

GaussianScene load_scene(const std::filesystem::path& path) { return decode_ply(read_file(path)); }

} // namespace scene_forge
