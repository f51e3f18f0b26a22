// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "codec.hpp"
#include "splat.hpp"

namespace scene_forge {

/// Binary little-endian PLY holding the unconstrained parameters as float32, so a
/// save/load round trip is bitwise.
Bytes encode_ply(const GaussianScene& scene);
/// Throws ErrorCode::Io on a malformed or foreign file.
GaussianScene decode_ply(const Bytes& bytes);

void save_scene(const std::filesystem::path& path, const GaussianScene& scene);
GaussianScene load_scene(const std::filesystem::path& path);

} // namespace scene_forge
