// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "image.hpp"

#include <algorithm>
#include <numeric>

namespace scene_forge {

std::size_t DepthMap::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

std::size_t BinaryMask::popcount() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](auto v) { return v != 0; }));
}

double image_mean(const Image& image) {
    if (image.data.empty()) return 0.0;
    double sum = std::accumulate(image.data.begin(), image.data.end(), 0.0);
    return sum / static_cast<double>(image.data.size());
}

} // namespace scene_forge
