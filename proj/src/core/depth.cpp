// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "depth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "error.hpp"

namespace scene_forge {

namespace {

// Summed-area table with one row/column of zero padding.
class Integral {
public:
    Integral(int w, int h) : w_(w), h_(h), sum_(static_cast<std::size_t>(w + 1) * (h + 1), 0.0) {}

    template <typename F>
    void build(F&& value) {
        for (int y = 0; y < h_; ++y) {
            double row = 0.0;
            for (int x = 0; x < w_; ++x) {
                row += value(static_cast<std::size_t>(y) * w_ + x);
                at(x + 1, y + 1) = at(x + 1, y) + row;
            }
        }
    }

    double box(int x0, int y0, int x1, int y1) const {
        return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
    }

private:
    double& at(int x, int y) { return sum_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
    double at(int x, int y) const { return sum_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

    int w_, h_;
    std::vector<double> sum_;
};

bool same_dims(const DepthMap& a, const DepthMap& b) { return a.width == b.width && a.height == b.height; }

double median_of(std::vector<double>& v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

} // namespace

void AlignmentParams::validate() const {
    if (guided_filter_radius < 1) fail(ErrorCode::Parameter, "alignment: radius must be >= 1");
    if (!(guided_filter_eps >= 0.0)) fail(ErrorCode::Parameter, "alignment: eps must be >= 0");
    if (dilation_iters < 0) fail(ErrorCode::Parameter, "alignment: dilation_iters must be >= 0");
    if (!(alpha_threshold > 0.0 && alpha_threshold < 1.0))
        fail(ErrorCode::Parameter, "alignment: alpha_threshold must lie in (0, 1)");
}

double valid_median(const DepthMap& depth) {
    std::vector<double> v;
    v.reserve(depth.values.size());
    for (std::size_t i = 0; i < depth.values.size(); ++i)
        if (depth.valid[i]) v.push_back(depth.values[i]);
    if (v.empty()) fail(ErrorCode::EmptyInput, "median: no valid pixels");
    return median_of(v);
}

double median_scale(const DepthMap& estimated_ref, const DepthMap& rendered_ref) {
    if (!same_dims(estimated_ref, rendered_ref)) fail(ErrorCode::Shape, "median_scale: dimension mismatch");
    std::vector<double> est, ren;
    for (std::size_t i = 0; i < estimated_ref.values.size(); ++i) {
        if (!estimated_ref.valid[i] || !rendered_ref.valid[i]) continue;
        est.push_back(estimated_ref.values[i]);
        ren.push_back(rendered_ref.values[i]);
    }
    if (est.empty()) fail(ErrorCode::EmptyInput, "median_scale: no jointly valid pixels");
    const double est_median = median_of(est);
    if (!(est_median > 0.0)) fail(ErrorCode::DegenerateDepth, "median_scale: estimated median is zero");
    return median_of(ren) / est_median;
}

DepthMap guided_filter(const DepthMap& input, const DepthMap& guide, int radius, double eps) {
    if (!same_dims(input, guide)) fail(ErrorCode::Shape, "guided_filter: dimension mismatch");
    if (radius < 1) fail(ErrorCode::Parameter, "guided_filter: radius must be >= 1");
    if (!(eps >= 0.0)) fail(ErrorCode::Parameter, "guided_filter: eps must be >= 0");

    const int w = input.width, h = input.height;
    const std::size_t n = input.pixel_count();
    auto used = [&](std::size_t i) { return input.valid[i] && guide.valid[i]; };

    Integral count(w, h), sum_i(w, h), sum_p(w, h), sum_ii(w, h), sum_ip(w, h);
    count.build([&](std::size_t i) { return used(i) ? 1.0 : 0.0; });
    sum_i.build([&](std::size_t i) { return used(i) ? double(guide.values[i]) : 0.0; });
    sum_p.build([&](std::size_t i) { return used(i) ? double(input.values[i]) : 0.0; });
    sum_ii.build([&](std::size_t i) { return used(i) ? double(guide.values[i]) * guide.values[i] : 0.0; });
    sum_ip.build([&](std::size_t i) { return used(i) ? double(guide.values[i]) * input.values[i] : 0.0; });

    std::vector<double> a(n, 0.0), b(n, 0.0);
    std::vector<std::uint8_t> has(n, 0);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
            const double cnt = count.box(x0, y0, x1, y1);
            if (cnt <= 0.0) continue;
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double mean_i = sum_i.box(x0, y0, x1, y1) / cnt;
            const double mean_p = sum_p.box(x0, y0, x1, y1) / cnt;
            const double var = std::max(0.0, sum_ii.box(x0, y0, x1, y1) / cnt - mean_i * mean_i);
            const double cov = sum_ip.box(x0, y0, x1, y1) / cnt - mean_i * mean_p;
            const double denom = var + eps;
            a[i] = denom > 0.0 ? cov / denom : 0.0;
            b[i] = mean_p - a[i] * mean_i;
            has[i] = 1;
        }
    }

    Integral count_ab(w, h), sum_a(w, h), sum_b(w, h);
    count_ab.build([&](std::size_t i) { return has[i] ? 1.0 : 0.0; });
    sum_a.build([&](std::size_t i) { return has[i] ? a[i] : 0.0; });
    sum_b.build([&](std::size_t i) { return has[i] ? b[i] : 0.0; });

    DepthMap out(w, h);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!guide.valid[i]) continue;
            const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
            const double cnt = count_ab.box(x0, y0, x1, y1);
            if (cnt <= 0.0) continue;
            const double q = sum_a.box(x0, y0, x1, y1) / cnt * guide.values[i] + sum_b.box(x0, y0, x1, y1) / cnt;
            out.set(x, y, static_cast<float>(q));
        }
    }
    return out;
}

DepthMap depth_align(const DepthMap& estimated, const DepthMap& rendered, const BinaryMask& unknown,
                     double scale, const AlignmentParams& params) {
    if (!same_dims(estimated, rendered) || unknown.width != estimated.width || unknown.height != estimated.height)
        fail(ErrorCode::Shape, "depth_align: dimension mismatch");
    if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorCode::Parameter, "depth_align: scale must be positive");
    params.validate();

    const std::size_t n = estimated.pixel_count();
    DepthMap scaled(estimated.width, estimated.height), guide(estimated.width, estimated.height);
    for (std::size_t i = 0; i < n; ++i) {
        if (estimated.valid[i]) {
            scaled.values[i] = static_cast<float>(scale * estimated.values[i]);
            scaled.valid[i] = 1;
        }
        const bool known = !unknown.values[i] && rendered.valid[i];
        if (known) {
            guide.values[i] = rendered.values[i];
            guide.valid[i] = 1;
        } else if (scaled.valid[i]) {
            guide.values[i] = scaled.values[i];
            guide.valid[i] = 1;
        }
    }
    if (guide.valid_count() == 0) return guide;

    double norm = valid_median(guide);
    if (!(norm > 0.0)) norm = 1.0;
    const float inv = static_cast<float>(1.0 / norm);
    DepthMap p = scaled, g = guide;
    for (auto& v : p.values) v *= inv;
    for (auto& v : g.values) v *= inv;
    DepthMap filtered = guided_filter(p, g, params.guided_filter_radius, params.guided_filter_eps);

    DepthMap out(estimated.width, estimated.height);
    for (std::size_t i = 0; i < n; ++i) {
        const bool known = !unknown.values[i] && rendered.valid[i];
        if (known) {
            out.values[i] = rendered.values[i];
            out.valid[i] = 1;
        } else if (filtered.valid[i]) {
            const double v = filtered.values[i] * norm;
            if (std::isfinite(v) && v > 0.0) {
                out.values[i] = static_cast<float>(v);
                out.valid[i] = 1;
            }
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, int iters) {
    if (iters < 0) fail(ErrorCode::Parameter, "dilate: iters must be >= 0");
    BinaryMask cur = mask, tmp = mask;
    const int w = mask.width, h = mask.height;
    for (int it = 0; it < iters; ++it) {
        // Separable 3x3: rows then columns.
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                std::uint8_t v = cur.values[cur.index(x, y)];
                if (x > 0) v |= cur.values[cur.index(x - 1, y)];
                if (x + 1 < w) v |= cur.values[cur.index(x + 1, y)];
                tmp.values[tmp.index(x, y)] = v ? 1 : 0;
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                std::uint8_t v = tmp.values[tmp.index(x, y)];
                if (y > 0) v |= tmp.values[tmp.index(x, y - 1)];
                if (y + 1 < h) v |= tmp.values[tmp.index(x, y + 1)];
                cur.values[cur.index(x, y)] = v ? 1 : 0;
            }
    }
    return cur;
}

BinaryMask mask_from_alpha(const Image& alpha, double threshold) {
    if (alpha.channels != 1) fail(ErrorCode::Shape, "mask_from_alpha: alpha must have one channel");
    if (!(threshold > 0.0 && threshold < 1.0)) fail(ErrorCode::Parameter, "mask_from_alpha: threshold must lie in (0, 1)");
    BinaryMask mask(alpha.width, alpha.height);
    for (std::size_t i = 0; i < alpha.data.size(); ++i) mask.values[i] = alpha.data[i] < threshold ? 1 : 0;
    return mask;
}

BinaryMask unknown_region(const Image& alpha, const AlignmentParams& params) {
    BinaryMask unknown = mask_from_alpha(alpha, params.alpha_threshold);
    BinaryMask known(unknown.width, unknown.height);
    for (std::size_t i = 0; i < known.values.size(); ++i) known.values[i] = unknown.values[i] ? 0 : 1;
    known = dilate(known, params.dilation_iters);
    for (std::size_t i = 0; i < known.values.size(); ++i) unknown.values[i] = known.values[i] ? 0 : 1;
    return unknown;
}

} // namespace scene_forge
