// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "geometry.hpp"
#include "image.hpp"
#include "splat.hpp"

namespace scene_forge {

inline constexpr int kTileSize = 16;

struct RenderSettings {
    Color3 background = Color3::Zero();
    /// Variance (px^2) added to every projected covariance as an anti-aliasing low-pass.
    double screen_blur = 0.8;
    double near_plane = 0.01;
};

struct RenderStats {
    std::size_t visible = 0;
    std::size_t culled = 0;
    std::size_t degenerate = 0;
    std::size_t tile_pairs = 0;
};

struct RenderOutput {
    Image color;   // H x W x 3
    DepthMap depth; // alpha-weighted expected camera-space depth, valid where alpha > 0
    Image alpha;   // H x W x 1
    RenderStats stats;
};

/// Upstream gradients of a scalar loss with respect to the render outputs.
struct RenderGradients {
    const Image* color = nullptr;    // H x W x 3, required
    const Image* depth = nullptr;    // H x W x 1, optional; ignored where depth is invalid
    const Image* alpha = nullptr;    // H x W x 1, optional
};

template <typename T>
struct SceneGradients {
    GaussianParams<T> params;
    /// Norm of the loss gradient w.r.t. each projected center, in normalized device units.
    std::vector<T> screen_grad_norm;
    std::vector<std::uint8_t> visible;
};

/// EWA splatting rasterizer with 16x16 tile binning. Keeps the forward pass state so that
/// `backward` can reuse the same culling set and per-pixel compositing order.
template <typename T>
class Rasterizer {
public:
    RenderOutput forward(const GaussianParams<T>& scene, const CameraIntrinsics& k, const CameraPose& pose,
                         const RenderSettings& settings = {});

    /// Exact gradients of the last forward pass. Throws ErrorCode::Invariant when `scene`
    /// is not the scene the forward pass saw.
    SceneGradients<T> backward(const GaussianParams<T>& scene, const RenderGradients& upstream);

    /// Unrounded outputs of the last forward pass: interleaved color, final transmittance
    /// (alpha = 1 - T) and the alpha-weighted depth sum.
    const std::vector<T>& color_buffer() const { return color_; }
    const std::vector<T>& transmittance_buffer() const { return final_transmittance_; }
    const std::vector<T>& depth_sum_buffer() const { return depth_sum_; }

    struct Projected {
        T u, v;        // projected center (pixels)
        T conic[3];    // inverse 2D covariance (a, b, c)
        T depth;       // camera-space z
        T opacity;
        int x0, x1, y0, y1; // pixel bounding box, inclusive
        bool visible;
    };

private:
    std::uint64_t fingerprint(const GaussianParams<T>& scene) const;

    CameraIntrinsics k_;
    CameraPose pose_;
    RenderSettings settings_;
    std::uint64_t scene_hash_ = 0;
    std::size_t scene_size_ = 0;
    bool has_forward_ = false;

    std::vector<Projected> projected_;
    std::vector<std::uint32_t> tile_offsets_; // tiles + 1
    std::vector<std::uint32_t> tile_entries_; // Gaussian indices, depth-sorted within tiles
    std::vector<T> final_transmittance_;
    std::vector<std::int32_t> last_contributor_; // position within the tile list, -1 if none
    std::vector<T> depth_sum_;
    std::vector<T> color_;
    int tiles_x_ = 0, tiles_y_ = 0;
};

/// Float-precision forward render.
RenderOutput render(const GaussianScene& scene, const CameraIntrinsics& k, const CameraPose& pose,
                    const RenderSettings& settings = {});

extern template class Rasterizer<float>;
extern template class Rasterizer<double>;

} // namespace scene_forge
