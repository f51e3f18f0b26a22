// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace scene_forge {

/// Row-major interleaved float image. Color images use 3 channels, alpha maps 1.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c, float fill = 0.0f)
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t index(int x, int y, int c = 0) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    float& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
    float at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

/// Per-pixel camera-space depth. Entries with valid == 0 hold 0 and never enter statistics.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;
    std::vector<std::uint8_t> valid;

    DepthMap() = default;
    DepthMap(int w, int h)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0f),
          valid(static_cast<std::size_t>(w) * h, 0) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

    void set(int x, int y, float depth) {
        values[index(x, y)] = depth;
        valid[index(x, y)] = 1;
    }
    void invalidate(std::size_t i) {
        values[i] = 0.0f;
        valid[i] = 0;
    }
    std::size_t valid_count() const;
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool at(int x, int y) const { return values[index(x, y)] != 0; }
    std::size_t popcount() const;
};

double image_mean(const Image& image);

} // namespace scene_forge
