// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "image.hpp"

namespace scene_forge {

using Bytes = std::vector<std::uint8_t>;

/// 8-bit PNG of a 1- or 3-channel image in [0, 1] (values rounded, clamped).
Bytes encode_png8(const Image& image);
/// 16-bit single-channel PNG.
Bytes encode_png16(const std::vector<std::uint16_t>& samples, int width, int height);

/// Decodes to `channels` (1 or 3) 8-bit samples scaled to [0, 1]. Throws ErrorCode::Protocol.
Image decode_png8(const Bytes& png, int channels);
/// Decodes a single-channel 16-bit PNG.
std::vector<std::uint16_t> decode_png16(const Bytes& png, int& width, int& height);

/// Rounds to the 8-bit grid the PNG codec stores.
Image quantize8(const Image& image);

std::string base64_encode(const Bytes& bytes);
/// Throws ErrorCode::Protocol on malformed input.
Bytes base64_decode(std::string_view text);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Bytes& bytes);

/// Depth in metres to 16-bit millimetres; invalid pixels become 0.
std::vector<std::uint16_t> depth_to_millimetres(const DepthMap& depth);

} // namespace scene_forge
