// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "rasterizer.hpp"

#include <oneapi/tbb/blocked_range.h>
#include <oneapi/tbb/parallel_for.h>
#include <oneapi/tbb/parallel_sort.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "error.hpp"

namespace scene_forge {

namespace {

constexpr double kMinAlpha = 1.0 / 255.0;
constexpr double kMaxAlpha = 0.999;
constexpr double kMinTransmittance = 1e-4;
constexpr double kMinDeterminant = 1e-12;
constexpr double kCutoffMahalanobis = 9.0; // 3 sigma
constexpr int kPairGrads = 10;              // u, v, conic a/b/c, rgb, opacity, depth

enum PairSlot { kU = 0, kV, kConicA, kConicB, kConicC, kR, kG, kB, kOpacity, kDepth };

template <typename T>
using M3 = Eigen::Matrix<T, 3, 3>;
template <typename T>
using V3 = Eigen::Matrix<T, 3, 1>;
template <typename T>
using M23 = Eigen::Matrix<T, 2, 3>;
template <typename T>
using M2 = Eigen::Matrix<T, 2, 2>;

// Intermediate quantities of projecting one Gaussian, shared by both passes.
template <typename T>
struct Projection3D {
    V3<T> q;      // normalized quaternion vector part (x, y, z)
    T qw;
    T qnorm;
    M3<T> rot;
    V3<T> scale;
    M3<T> m;      // rot * diag(scale)
    M3<T> sigma;
    V3<T> cam;    // camera-space center
    T xc, yc;     // cam x, y with x/z, y/z clamped to the widened frustum
    bool clamp_x, clamp_y;
    M23<T> jac;
    M23<T> tm;    // jac * view rotation
    M2<T> cov2;
    T det;
};

template <typename T>
M3<T> quat_to_rot(T w, T x, T y, T z) {
    M3<T> r;
    r << T(1) - T(2) * (y * y + z * z), T(2) * (x * y - w * z), T(2) * (x * z + w * y),
        T(2) * (x * y + w * z), T(1) - T(2) * (x * x + z * z), T(2) * (y * z - w * x),
        T(2) * (x * z - w * y), T(2) * (y * z + w * x), T(1) - T(2) * (x * x + y * y);
    return r;
}

// Off-screen centers close to the image plane make the affine projection explode; the
// Jacobian is evaluated at the nearest point of a frustum 1.3x wider than the image.
constexpr double kFrustumMargin = 1.3;

struct CameraT {
    struct Plane {
        double nx, ny, nz; // unit normal pointing out of the frustum
    };
    double fx, fy, cx, cy;
    double lim_x, lim_y; // tangent limits
    Plane planes[4];
    CameraT(const CameraIntrinsics& k, double blur)
        : fx(k.fx), fy(k.fy), cx(k.cx), cy(k.cy),
          lim_x(kFrustumMargin * std::max(k.cx + 0.5, k.width - 0.5 - k.cx) / k.fx),
          lim_y(kFrustumMargin * std::max(k.cy + 0.5, k.height - 0.5 - k.cy) / k.fy) {
        // Side planes through the camera center, padded by the screen blur footprint.
        const double pad = 3.0 * std::sqrt(blur) + 1.0;
        const double right = (k.width - 1 + pad - k.cx) / k.fx, left = (k.cx + pad) / k.fx;
        const double bottom = (k.height - 1 + pad - k.cy) / k.fy, top = (k.cy + pad) / k.fy;
        auto plane = [](double a, double b, double c) {
            const double n = std::sqrt(a * a + b * b + c * c);
            return Plane{a / n, b / n, c / n};
        };
        planes[0] = plane(1.0, 0.0, -right);
        planes[1] = plane(-1.0, 0.0, -left);
        planes[2] = plane(0.0, 1.0, -bottom);
        planes[3] = plane(0.0, -1.0, -top);
    }
};

template <typename T>
bool project_gaussian(const GaussianParams<T>& s, std::size_t i, const M3<T>& view, const V3<T>& tvec,
                      const CameraT& cam, T blur, T near_plane, Projection3D<T>& out) {
    const V3<T> world(s.centers[3 * i], s.centers[3 * i + 1], s.centers[3 * i + 2]);
    out.cam = view * world + tvec;
    const T z = out.cam.z();
    if (!(z > near_plane)) return false;
    // Cheap reject: the 3 sigma sphere lies entirely outside the (padded) view frustum.
    const T* ls = &s.log_scales[3 * i];
    const T reach = T(3) * std::exp(std::max({ls[0], ls[1], ls[2]}));
    for (int side = 0; side < 4; ++side) {
        const CameraT::Plane& pl = cam.planes[side];
        if (T(pl.nx) * out.cam.x() + T(pl.ny) * out.cam.y() + T(pl.nz) * z > reach) return false;
    }
    const T* qr = &s.rotations[4 * i];
    out.qnorm = std::sqrt(qr[0] * qr[0] + qr[1] * qr[1] + qr[2] * qr[2] + qr[3] * qr[3]);
    const T inv = out.qnorm > T(0) ? T(1) / out.qnorm : T(0);
    out.qw = qr[0] * inv;
    out.q = V3<T>(qr[1] * inv, qr[2] * inv, qr[3] * inv);
    out.rot = quat_to_rot(out.qw, out.q.x(), out.q.y(), out.q.z());
    out.scale = V3<T>(std::exp(s.log_scales[3 * i]), std::exp(s.log_scales[3 * i + 1]), std::exp(s.log_scales[3 * i + 2]));
    out.m = out.rot * out.scale.asDiagonal();
    out.sigma = out.m * out.m.transpose();
    const T fx = T(cam.fx), fy = T(cam.fy);
    const T tx = out.cam.x() / z, ty = out.cam.y() / z;
    const T lx = T(cam.lim_x), ly = T(cam.lim_y);
    out.clamp_x = tx < -lx || tx > lx;
    out.clamp_y = ty < -ly || ty > ly;
    out.xc = out.clamp_x ? std::clamp(tx, -lx, lx) * z : out.cam.x();
    out.yc = out.clamp_y ? std::clamp(ty, -ly, ly) * z : out.cam.y();
    out.jac << fx / z, T(0), -fx * out.xc / (z * z), T(0), fy / z, -fy * out.yc / (z * z);
    out.tm = out.jac * view;
    out.cov2 = out.tm * out.sigma * out.tm.transpose();
    out.cov2(0, 0) += blur;
    out.cov2(1, 1) += blur;
    out.det = out.cov2(0, 0) * out.cov2(1, 1) - out.cov2(0, 1) * out.cov2(1, 0);
    return true;
}

template <typename T>
struct PixelHit {
    T alpha, gauss, dx, dy;
    bool clamped;
};

template <typename T>
inline bool evaluate(const typename Rasterizer<T>::Projected& p, int x, int y, PixelHit<T>& hit) {
    hit.dx = T(x) - p.u;
    hit.dy = T(y) - p.v;
    const T maha = p.conic[0] * hit.dx * hit.dx + T(2) * p.conic[1] * hit.dx * hit.dy + p.conic[2] * hit.dy * hit.dy;
    if (!(maha <= T(kCutoffMahalanobis))) return false;
    hit.gauss = std::exp(T(-0.5) * maha);
    const T raw = p.opacity * hit.gauss;
    hit.clamped = raw > T(kMaxAlpha);
    hit.alpha = hit.clamped ? T(kMaxAlpha) : raw;
    return hit.alpha >= T(kMinAlpha);
}

// Columns of row y that can pass the Mahalanobis cut, clipped to [xs, xe]. Slightly
// conservative; evaluate() still applies the exact test.
template <typename T>
inline bool row_span(const typename Rasterizer<T>::Projected& p, int y, int xs, int xe, int& x0, int& x1) {
    const double a = p.conic[0], b = p.conic[1], c = p.conic[2];
    if (!(a > 0.0)) {
        x0 = xs;
        x1 = xe;
        return true;
    }
    const double dy = double(y) - double(p.v);
    const double disc = (b * dy) * (b * dy) - a * (c * dy * dy - kCutoffMahalanobis);
    if (disc < 0.0) return false;
    const double root = std::sqrt(disc);
    const double lo = double(p.u) + (-b * dy - root) / a, hi = double(p.u) + (-b * dy + root) / a;
    x0 = std::max(xs, static_cast<int>(std::ceil(lo - 1e-3)));
    x1 = std::min(xe, static_cast<int>(std::floor(hi + 1e-3)));
    return x0 <= x1;
}

template <typename T>
std::uint64_t hash_vec(std::uint64_t h, const std::vector<T>& v) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    const std::size_t n = v.size() * sizeof(T);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        std::uint64_t word;
        std::memcpy(&word, bytes + i, 8);
        h = (h ^ word) * 0x100000001b3ull;
        h ^= h >> 29;
    }
    for (; i < n; ++i) h = (h ^ bytes[i]) * 0x100000001b3ull;
    return h;
}

} // namespace

template <typename T>
std::uint64_t Rasterizer<T>::fingerprint(const GaussianParams<T>& scene) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = hash_vec(h, scene.centers);
    h = hash_vec(h, scene.colors);
    h = hash_vec(h, scene.opacity_logits);
    h = hash_vec(h, scene.log_scales);
    h = hash_vec(h, scene.rotations);
    return h;
}

template <typename T>
RenderOutput Rasterizer<T>::forward(const GaussianParams<T>& scene, const CameraIntrinsics& k, const CameraPose& pose,
                                    const RenderSettings& settings) {
    k.validate();
    k_ = k;
    pose_ = pose;
    settings_ = settings;
    scene_size_ = scene.size();
    scene_hash_ = fingerprint(scene);
    has_forward_ = true;

    const int width = k.width, height = k.height;
    const std::size_t n = scene.size();
    const M3<T> view = pose.rotation.cast<T>();
    const V3<T> tvec = pose.translation.cast<T>();
    const CameraT cam(k, settings.screen_blur);
    const T blur = T(settings.screen_blur);
    const T near_plane = T(settings.near_plane);

    projected_.assign(n, Projected{});
    std::vector<std::uint8_t> status(n, 0); // 0 visible, 1 culled, 2 degenerate
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 4096), [&](const tbb::blocked_range<std::size_t>& r) {
        Projection3D<T> pr;
        for (std::size_t i = r.begin(); i != r.end(); ++i) {
            Projected& p = projected_[i];
            p.visible = false;
            if (!project_gaussian(scene, i, view, tvec, cam, blur, near_plane, pr)) {
                status[i] = 1;
                continue;
            }
            if (!(pr.det >= T(kMinDeterminant))) {
                status[i] = 2;
                continue;
            }
            const T inv_det = T(1) / pr.det;
            p.conic[0] = pr.cov2(1, 1) * inv_det;
            p.conic[1] = -pr.cov2(0, 1) * inv_det;
            p.conic[2] = pr.cov2(0, 0) * inv_det;
            const T z = pr.cam.z();
            p.u = T(cam.fx) * pr.cam.x() / z + T(cam.cx);
            p.v = T(cam.fy) * pr.cam.y() / z + T(cam.cy);
            p.depth = z;
            p.opacity = sigmoid(scene.opacity_logits[i]);
            // Axis-aligned box of the 3 sigma ellipse: maha <= 9 implies |dx| <= 3 sqrt(cov_xx).
            const T rx = T(3) * std::sqrt(pr.cov2(0, 0)), ry = T(3) * std::sqrt(pr.cov2(1, 1));
            if (!std::isfinite(p.u) || !std::isfinite(p.v) || !std::isfinite(rx) || !std::isfinite(ry)) {
                status[i] = 1;
                continue;
            }
            const double x0 = std::ceil(double(p.u - rx)), x1 = std::floor(double(p.u + rx));
            const double y0 = std::ceil(double(p.v - ry)), y1 = std::floor(double(p.v + ry));
            if (x1 < 0.0 || y1 < 0.0 || x0 > width - 1 || y0 > height - 1 || x0 > x1 || y0 > y1) {
                status[i] = 1;
                continue;
            }
            p.x0 = static_cast<int>(std::max(0.0, x0));
            p.x1 = static_cast<int>(std::min(double(width - 1), x1));
            p.y0 = static_cast<int>(std::max(0.0, y0));
            p.y1 = static_cast<int>(std::min(double(height - 1), y1));
            p.visible = true;
        }
    });

    RenderOutput out;
    std::vector<std::uint32_t> order;
    order.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (status[i] == 0) order.push_back(static_cast<std::uint32_t>(i));
        else if (status[i] == 1) ++out.stats.culled;
        else ++out.stats.degenerate;
    }
    out.stats.visible = order.size();
    // Depth-major keys: positive floats order like their bit patterns, the index breaks ties.
    // Double renders compare depths at float precision.
    {
        std::vector<std::uint64_t> keys(order.size());
        for (std::size_t j = 0; j < order.size(); ++j) {
            const float d = static_cast<float>(projected_[order[j]].depth);
            std::uint32_t bits;
            std::memcpy(&bits, &d, sizeof bits);
            keys[j] = (static_cast<std::uint64_t>(bits) << 32) | order[j];
        }
        tbb::parallel_sort(keys.begin(), keys.end());
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<std::uint32_t>(keys[j]);
    }

    tiles_x_ = (width + kTileSize - 1) / kTileSize;
    tiles_y_ = (height + kTileSize - 1) / kTileSize;
    const std::size_t tiles = static_cast<std::size_t>(tiles_x_) * tiles_y_;
    tile_offsets_.assign(tiles + 1, 0);
    for (std::uint32_t g : order) {
        const Projected& p = projected_[g];
        for (int ty = p.y0 / kTileSize; ty <= p.y1 / kTileSize; ++ty)
            for (int tx = p.x0 / kTileSize; tx <= p.x1 / kTileSize; ++tx)
                ++tile_offsets_[static_cast<std::size_t>(ty) * tiles_x_ + tx + 1];
    }
    for (std::size_t t = 0; t < tiles; ++t) tile_offsets_[t + 1] += tile_offsets_[t];
    tile_entries_.assign(tile_offsets_[tiles], 0);
    out.stats.tile_pairs = tile_entries_.size();
    {
        std::vector<std::uint32_t> cursor(tile_offsets_.begin(), tile_offsets_.end() - 1);
        for (std::uint32_t g : order) {
            const Projected& p = projected_[g];
            for (int ty = p.y0 / kTileSize; ty <= p.y1 / kTileSize; ++ty)
                for (int tx = p.x0 / kTileSize; tx <= p.x1 / kTileSize; ++tx)
                    tile_entries_[cursor[static_cast<std::size_t>(ty) * tiles_x_ + tx]++] = g;
        }
    }

    const std::size_t pixels = static_cast<std::size_t>(width) * height;
    out.color = Image(width, height, 3);
    out.alpha = Image(width, height, 1);
    out.depth = DepthMap(width, height);
    final_transmittance_.assign(pixels, T(1));
    last_contributor_.assign(pixels, -1);
    depth_sum_.assign(pixels, T(0));
    color_.assign(3 * pixels, T(0));
    const T bg[3] = {T(settings.background[0]), T(settings.background[1]), T(settings.background[2])};

    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, tiles, 1), [&](const tbb::blocked_range<std::size_t>& r) {
        for (std::size_t t = r.begin(); t != r.end(); ++t) {
            const int px0 = static_cast<int>(t % tiles_x_) * kTileSize;
            const int py0 = static_cast<int>(t / tiles_x_) * kTileSize;
            const int px1 = std::min(width, px0 + kTileSize) - 1;
            const int py1 = std::min(height, py0 + kTileSize) - 1;
            std::array<T, kTileSize * kTileSize> trans, dsum;
            std::array<std::array<T, 3>, kTileSize * kTileSize> csum;
            std::array<std::int32_t, kTileSize * kTileSize> last;
            std::array<std::uint8_t, kTileSize * kTileSize> done;
            trans.fill(T(1));
            dsum.fill(T(0));
            csum.fill({T(0), T(0), T(0)});
            last.fill(-1);
            done.fill(0);
            int remaining = (px1 - px0 + 1) * (py1 - py0 + 1);
            const std::uint32_t begin = tile_offsets_[t], end = tile_offsets_[t + 1];
            for (std::uint32_t j = begin; j < end && remaining > 0; ++j) {
                const std::uint32_t g = tile_entries_[j];
                const Projected& p = projected_[g];
                const T* c = &scene.colors[3 * g];
                const int xs = std::max(p.x0, px0), xe = std::min(p.x1, px1);
                const int ys = std::max(p.y0, py0), ye = std::min(p.y1, py1);
                for (int y = ys; y <= ye; ++y) {
                    int rx0, rx1;
                    if (!row_span<T>(p, y, xs, xe, rx0, rx1)) continue;
                    for (int x = rx0; x <= rx1; ++x) {
                        const int lp = (y - py0) * kTileSize + (x - px0);
                        if (done[lp]) continue;
                        PixelHit<T> hit;
                        if (!evaluate<T>(p, x, y, hit)) continue;
                        const T next = trans[lp] * (T(1) - hit.alpha);
                        if (next < T(kMinTransmittance)) {
                            done[lp] = 1;
                            --remaining;
                            continue;
                        }
                        const T w = hit.alpha * trans[lp];
                        csum[lp][0] += c[0] * w;
                        csum[lp][1] += c[1] * w;
                        csum[lp][2] += c[2] * w;
                        dsum[lp] += p.depth * w;
                        trans[lp] = next;
                        last[lp] = static_cast<std::int32_t>(j - begin);
                    }
                }
            }
            for (int y = py0; y <= py1; ++y) {
                for (int x = px0; x <= px1; ++x) {
                    const int lp = (y - py0) * kTileSize + (x - px0);
                    const std::size_t pi = static_cast<std::size_t>(y) * width + x;
                    final_transmittance_[pi] = trans[lp];
                    last_contributor_[pi] = last[lp];
                    depth_sum_[pi] = dsum[lp];
                    for (int ch = 0; ch < 3; ++ch) {
                        color_[3 * pi + ch] = csum[lp][ch] + trans[lp] * bg[ch];
                        out.color.data[3 * pi + ch] = static_cast<float>(color_[3 * pi + ch]);
                    }
                    const T a = T(1) - trans[lp];
                    out.alpha.data[pi] = static_cast<float>(a);
                    if (a > T(0)) {
                        out.depth.values[pi] = static_cast<float>(dsum[lp] / a);
                        out.depth.valid[pi] = 1;
                    }
                }
            }
        }
    });
    return out;
}

template <typename T>
SceneGradients<T> Rasterizer<T>::backward(const GaussianParams<T>& scene, const RenderGradients& upstream) {
    if (!has_forward_ || scene.size() != scene_size_ || fingerprint(scene) != scene_hash_)
        fail(ErrorCode::Invariant, "render_backward: forward cache does not match the scene");
    const int width = k_.width, height = k_.height;
    if (upstream.color == nullptr || upstream.color->width != width || upstream.color->height != height ||
        upstream.color->channels != 3)
        fail(ErrorCode::Shape, "render_backward: color gradient shape mismatch");
    auto check1 = [&](const Image* img) {
        if (img && (img->width != width || img->height != height || img->channels != 1))
            fail(ErrorCode::Shape, "render_backward: gradient shape mismatch");
    };
    check1(upstream.depth);
    check1(upstream.alpha);

    const std::size_t n = scene.size();
    const std::size_t tiles = static_cast<std::size_t>(tiles_x_) * tiles_y_;
    std::vector<T> pair_grad(tile_entries_.size() * kPairGrads, T(0));
    const T bg[3] = {T(settings_.background[0]), T(settings_.background[1]), T(settings_.background[2])};

    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, tiles, 1), [&](const tbb::blocked_range<std::size_t>& r) {
        for (std::size_t t = r.begin(); t != r.end(); ++t) {
            const int px0 = static_cast<int>(t % tiles_x_) * kTileSize;
            const int py0 = static_cast<int>(t / tiles_x_) * kTileSize;
            const int px1 = std::min(width, px0 + kTileSize) - 1;
            const int py1 = std::min(height, py0 + kTileSize) - 1;
            constexpr int kPix = kTileSize * kTileSize;
            std::array<T, kPix> trans, acc_s, acc_a, grad_s, grad_a;
            std::array<std::array<T, 3>, kPix> acc_c, grad_c;
            std::array<std::int32_t, kPix> last;
            last.fill(-1);
            std::int32_t max_last = -1;
            for (int y = py0; y <= py1; ++y) {
                for (int x = px0; x <= px1; ++x) {
                    const int lp = (y - py0) * kTileSize + (x - px0);
                    const std::size_t pi = static_cast<std::size_t>(y) * width + x;
                    trans[lp] = final_transmittance_[pi];
                    last[lp] = last_contributor_[pi];
                    max_last = std::max(max_last, last[lp]);
                    acc_c[lp] = {bg[0], bg[1], bg[2]};
                    acc_s[lp] = T(0);
                    acc_a[lp] = T(0);
                    for (int ch = 0; ch < 3; ++ch) grad_c[lp][ch] = T(upstream.color->data[3 * pi + ch]);
                    T gs = T(0), ga = upstream.alpha ? T(upstream.alpha->data[pi]) : T(0);
                    const T a = T(1) - trans[lp];
                    if (upstream.depth && a > T(0)) {
                        const T gd = T(upstream.depth->data[pi]);
                        gs = gd / a;
                        ga -= gd * depth_sum_[pi] / (a * a);
                    }
                    grad_s[lp] = gs;
                    grad_a[lp] = ga;
                }
            }
            const std::uint32_t begin = tile_offsets_[t];
            for (std::int32_t j = max_last; j >= 0; --j) {
                const std::uint32_t g = tile_entries_[begin + j];
                const Projected& p = projected_[g];
                const T* c = &scene.colors[3 * g];
                T* pg = &pair_grad[static_cast<std::size_t>(begin + j) * kPairGrads];
                const int xs = std::max(p.x0, px0), xe = std::min(p.x1, px1);
                const int ys = std::max(p.y0, py0), ye = std::min(p.y1, py1);
                for (int y = ys; y <= ye; ++y) {
                    int rx0, rx1;
                    if (!row_span<T>(p, y, xs, xe, rx0, rx1)) continue;
                    for (int x = rx0; x <= rx1; ++x) {
                        const int lp = (y - py0) * kTileSize + (x - px0);
                        if (j > last[lp]) continue;
                        PixelHit<T> hit;
                        if (!evaluate<T>(p, x, y, hit)) continue;
                        const T before = trans[lp] / (T(1) - hit.alpha);
                        const T w = hit.alpha * before;
                        const auto& gc = grad_c[lp];
                        pg[kR] += gc[0] * w;
                        pg[kG] += gc[1] * w;
                        pg[kB] += gc[2] * w;
                        pg[kDepth] += grad_s[lp] * w;
                        auto& ac = acc_c[lp];
                        const T dl_dalpha =
                            before * (gc[0] * (c[0] - ac[0]) + gc[1] * (c[1] - ac[1]) + gc[2] * (c[2] - ac[2]) +
                                      grad_s[lp] * (p.depth - acc_s[lp]) + grad_a[lp] * (T(1) - acc_a[lp]));
                        for (int ch = 0; ch < 3; ++ch) ac[ch] = hit.alpha * c[ch] + (T(1) - hit.alpha) * ac[ch];
                        acc_s[lp] = hit.alpha * p.depth + (T(1) - hit.alpha) * acc_s[lp];
                        acc_a[lp] = hit.alpha + (T(1) - hit.alpha) * acc_a[lp];
                        trans[lp] = before;
                        if (hit.clamped) continue;
                        pg[kOpacity] += dl_dalpha * hit.gauss;
                        const T dl_dpower = dl_dalpha * hit.alpha;
                        pg[kConicA] += T(-0.5) * hit.dx * hit.dx * dl_dpower;
                        pg[kConicB] += -hit.dx * hit.dy * dl_dpower;
                        pg[kConicC] += T(-0.5) * hit.dy * hit.dy * dl_dpower;
                        pg[kU] += dl_dpower * (p.conic[0] * hit.dx + p.conic[1] * hit.dy);
                        pg[kV] += dl_dpower * (p.conic[1] * hit.dx + p.conic[2] * hit.dy);
                    }
                }
            }
        }
    });

    // Deterministic reduction in fixed tile order.
    std::vector<T> g2d(n * kPairGrads, T(0));
    for (std::size_t j = 0; j < tile_entries_.size(); ++j) {
        T* dst = &g2d[static_cast<std::size_t>(tile_entries_[j]) * kPairGrads];
        const T* src = &pair_grad[j * kPairGrads];
        for (int s = 0; s < kPairGrads; ++s) dst[s] += src[s];
    }

    SceneGradients<T> out;
    out.params = GaussianParams<T>::zeros_like(scene);
    out.screen_grad_norm.assign(n, T(0));
    out.visible.assign(n, 0);
    const M3<T> view = pose_.rotation.cast<T>();
    const V3<T> tvec = pose_.translation.cast<T>();
    const CameraT cam(k_, settings_.screen_blur);
    const T blur = T(settings_.screen_blur);
    const T near_plane = T(settings_.near_plane);

    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 4096), [&](const tbb::blocked_range<std::size_t>& r) {
        Projection3D<T> pr;
        for (std::size_t i = r.begin(); i != r.end(); ++i) {
            const Projected& p = projected_[i];
            if (!p.visible) continue;
            out.visible[i] = 1;
            const T* gi = &g2d[i * kPairGrads];
            for (int ch = 0; ch < 3; ++ch) out.params.colors[3 * i + ch] = gi[kR + ch];
            out.params.opacity_logits[i] = gi[kOpacity] * p.opacity * (T(1) - p.opacity);
            out.screen_grad_norm[i] =
                std::sqrt(std::pow(gi[kU] * T(0.5) * T(width), 2) + std::pow(gi[kV] * T(0.5) * T(height), 2));

            project_gaussian(scene, i, view, tvec, cam, blur, near_plane, pr);
            const T x = pr.cam.x(), y = pr.cam.y(), z = pr.cam.z();
            const T fx = T(cam.fx), fy = T(cam.fy);

            // conic -> 2D covariance
            M2<T> conic;
            conic << p.conic[0], p.conic[1], p.conic[1], p.conic[2];
            M2<T> g_conic;
            g_conic << gi[kConicA], T(0.5) * gi[kConicB], T(0.5) * gi[kConicB], gi[kConicC];
            const M2<T> g_cov2 = -conic * g_conic * conic;

            // cov2 = tm * sigma * tm^T
            const M3<T> g_sigma = pr.tm.transpose() * g_cov2 * pr.tm;
            const M23<T> g_tm = T(2) * g_cov2 * pr.tm * pr.sigma;
            const M23<T> g_jac = g_tm * view.transpose();

            V3<T> g_cam = V3<T>::Zero();
            // A clamped Jacobian entry is -f * lim / z, independent of x (or y).
            const T dj02_dx = pr.clamp_x ? T(0) : -fx / (z * z);
            const T dj12_dy = pr.clamp_y ? T(0) : -fy / (z * z);
            const T dj02_dz = pr.clamp_x ? fx * pr.xc / (z * z * z) : T(2) * fx * x / (z * z * z);
            const T dj12_dz = pr.clamp_y ? fy * pr.yc / (z * z * z) : T(2) * fy * y / (z * z * z);
            g_cam.x() += gi[kU] * fx / z + g_jac(0, 2) * dj02_dx;
            g_cam.y() += gi[kV] * fy / z + g_jac(1, 2) * dj12_dy;
            g_cam.z() += gi[kU] * (-fx * x / (z * z)) + gi[kV] * (-fy * y / (z * z)) + gi[kDepth];
            g_cam.z() += g_jac(0, 0) * (-fx / (z * z)) + g_jac(0, 2) * dj02_dz + g_jac(1, 1) * (-fy / (z * z)) +
                         g_jac(1, 2) * dj12_dz;
            const V3<T> g_world = view.transpose() * g_cam;
            for (int a = 0; a < 3; ++a) out.params.centers[3 * i + a] = g_world[a];

            // sigma = m m^T, m = rot * diag(scale)
            const M3<T> g_m = T(2) * g_sigma * pr.m;
            M3<T> g_rot;
            for (int col = 0; col < 3; ++col) {
                out.params.log_scales[3 * i + col] = g_m.col(col).dot(pr.rot.col(col)) * pr.scale[col];
                g_rot.col(col) = g_m.col(col) * pr.scale[col];
            }
            const T w = pr.qw, qx = pr.q.x(), qy = pr.q.y(), qz = pr.q.z();
            const M3<T>& G = g_rot;
            T gq[4];
            gq[0] = T(2) * (-qz * G(0, 1) + qy * G(0, 2) + qz * G(1, 0) - qx * G(1, 2) - qy * G(2, 0) + qx * G(2, 1));
            gq[1] = T(2) * (qy * G(0, 1) + qz * G(0, 2) + qy * G(1, 0) - T(2) * qx * G(1, 1) - w * G(1, 2) +
                            qz * G(2, 0) + w * G(2, 1) - T(2) * qx * G(2, 2));
            gq[2] = T(2) * (-T(2) * qy * G(0, 0) + qx * G(0, 1) + w * G(0, 2) + qx * G(1, 0) + qz * G(1, 2) -
                            w * G(2, 0) + qz * G(2, 1) - T(2) * qy * G(2, 2));
            gq[3] = T(2) * (-T(2) * qz * G(0, 0) - w * G(0, 1) + qx * G(0, 2) + w * G(1, 0) - T(2) * qz * G(1, 1) +
                            qy * G(1, 2) + qx * G(2, 0) + qy * G(2, 1));
            // through normalization
            const T qn[4] = {w, qx, qy, qz};
            const T dot = gq[0] * qn[0] + gq[1] * qn[1] + gq[2] * qn[2] + gq[3] * qn[3];
            for (int a = 0; a < 4; ++a) out.params.rotations[4 * i + a] = (gq[a] - qn[a] * dot) / pr.qnorm;
        }
    });
    return out;
}

RenderOutput render(const GaussianScene& scene, const CameraIntrinsics& k, const CameraPose& pose,
                    const RenderSettings& settings) {
    Rasterizer<float> rasterizer;
    return rasterizer.forward(scene, k, pose, settings);
}

template class Rasterizer<float>;
template class Rasterizer<double>;

} // namespace scene_forge
