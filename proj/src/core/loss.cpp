// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "loss.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include "error.hpp"

namespace scene_forge {

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::array<double, kWindow>& window_taps() {
    static const std::array<double, kWindow> taps = [] {
        std::array<double, kWindow> t{};
        double sum = 0.0;
        for (int i = 0; i < kWindow; ++i) {
            const double d = i - kHalf;
            t[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += t[i];
        }
        for (auto& v : t) v /= sum;
        return t;
    }();
    return taps;
}

// Sum of in-image taps for each position along an axis of length n.
std::vector<double> border_norm(int n) {
    const auto& g = window_taps();
    std::vector<double> z(n, 0.0);
    for (int x = 0; x < n; ++x)
        for (int k = 0; k < kWindow; ++k) {
            const int s = x + k - kHalf;
            if (s >= 0 && s < n) z[x] += g[k];
        }
    return z;
}

// Planar separable Gaussian filter with border renormalization, and its adjoint.
class WindowFilter {
public:
    WindowFilter(int w, int h) : w_(w), h_(h), zx_(border_norm(w)), zy_(border_norm(h)), tmp_(std::size_t(w) * h) {}

    void apply(const std::vector<double>& in, std::vector<double>& out) {
        out.assign(in.size(), 0.0);
        horizontal(in, tmp_);
        for (int y = 0; y < h_; ++y)
            for (int x = 0; x < w_; ++x) tmp_[idx(x, y)] /= zx_[x];
        vertical(tmp_, out);
        for (int y = 0; y < h_; ++y)
            for (int x = 0; x < w_; ++x) out[idx(x, y)] /= zy_[y];
    }

    void adjoint(const std::vector<double>& in, std::vector<double>& out) {
        std::vector<double> scaled(in.size());
        for (int y = 0; y < h_; ++y)
            for (int x = 0; x < w_; ++x) scaled[idx(x, y)] = in[idx(x, y)] / zy_[y];
        vertical(scaled, tmp_);
        for (int y = 0; y < h_; ++y)
            for (int x = 0; x < w_; ++x) tmp_[idx(x, y)] /= zx_[x];
        out.assign(in.size(), 0.0);
        horizontal(tmp_, out);
    }

private:
    std::size_t idx(int x, int y) const { return std::size_t(y) * w_ + x; }

    // Both passes are symmetric in the taps, so they serve as their own adjoints.
    void horizontal(const std::vector<double>& in, std::vector<double>& out) const {
        const auto& g = window_taps();
        for (int y = 0; y < h_; ++y) {
            const double* row = &in[idx(0, y)];
            double* dst = &out[idx(0, y)];
            for (int x = 0; x < w_; ++x) {
                double acc = 0.0;
                if (x >= kHalf && x + kHalf < w_) {
                    const double* src = row + x - kHalf;
                    for (int k = 0; k < kWindow; ++k) acc += g[k] * src[k];
                } else {
                    for (int k = 0; k < kWindow; ++k) {
                        const int s = x + k - kHalf;
                        if (s >= 0 && s < w_) acc += g[k] * row[s];
                    }
                }
                dst[x] = acc;
            }
        }
    }

    void vertical(const std::vector<double>& in, std::vector<double>& out) const {
        const auto& g = window_taps();
        for (int y = 0; y < h_; ++y) {
            double* dst = &out[idx(0, y)];
            std::fill(dst, dst + w_, 0.0);
            for (int k = 0; k < kWindow; ++k) {
                const int s = y + k - kHalf;
                if (s < 0 || s >= h_) continue;
                const double* src = &in[idx(0, s)];
                const double gk = g[k];
                for (int x = 0; x < w_; ++x) dst[x] += gk * src[x];
            }
        }
    }

    int w_, h_;
    std::vector<double> zx_, zy_;
    std::vector<double> tmp_;
};

void require_same(const Image& a, const Image& b, const char* op) {
    if (!a.same_shape(b)) fail(ErrorCode::Shape, std::string(op) + ": shape mismatch");
}

// Mean SSIM; fills the gradient when `grad` is non-null.
double ssim_impl(const Image& pred, const Image& target, Image* grad) {
    require_same(pred, target, "ssim");
    const int w = pred.width, h = pred.height, ch = pred.channels;
    const std::size_t pixels = pred.pixel_count();
    if (pixels == 0) return 1.0;
    WindowFilter filter(w, h);
    const double count = static_cast<double>(pixels) * ch;
    double total = 0.0;
    if (grad) *grad = Image(w, h, ch);

    std::vector<double> x(pixels), y(pixels), xx(pixels), yy(pixels), xy(pixels);
    std::vector<double> mx, my, exx, eyy, exy;
    std::vector<double> d_mu(pixels), d_exx(pixels), d_exy(pixels);
    for (int c = 0; c < ch; ++c) {
        for (std::size_t i = 0; i < pixels; ++i) {
            x[i] = pred.data[i * ch + c];
            y[i] = target.data[i * ch + c];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        filter.apply(x, mx);
        filter.apply(y, my);
        filter.apply(xx, exx);
        filter.apply(yy, eyy);
        filter.apply(xy, exy);
        for (std::size_t i = 0; i < pixels; ++i) {
            const double ux = mx[i], uy = my[i];
            const double vx = exx[i] - ux * ux, vy = eyy[i] - uy * uy, cxy = exy[i] - ux * uy;
            const double a1 = 2.0 * ux * uy + kC1, a2 = 2.0 * cxy + kC2;
            const double b1 = ux * ux + uy * uy + kC1, b2 = vx + vy + kC2;
            const double s = a1 * a2 / (b1 * b2);
            total += s;
            if (!grad) continue;
            const double ds_dmu = 2.0 * uy * a2 / (b1 * b2) - s * 2.0 * ux / b1;
            const double ds_dvx = -s / b2;
            const double ds_dcxy = 2.0 * a1 / (b1 * b2);
            const double up = -1.0 / count; // d loss / d s
            d_exx[i] = up * ds_dvx;
            d_exy[i] = up * ds_dcxy;
            d_mu[i] = up * (ds_dmu - 2.0 * ux * ds_dvx - uy * ds_dcxy);
        }
        if (!grad) continue;
        std::vector<double> g_mu, g_xx, g_xy;
        filter.adjoint(d_mu, g_mu);
        filter.adjoint(d_exx, g_xx);
        filter.adjoint(d_exy, g_xy);
        for (std::size_t i = 0; i < pixels; ++i)
            grad->data[i * ch + c] = static_cast<float>(g_mu[i] + 2.0 * x[i] * g_xx[i] + y[i] * g_xy[i]);
    }
    return total / count;
}

struct Registry {
    std::mutex mutex;
    std::map<std::string, PerceptualFactory> factories;
};

Registry& registry() {
    static Registry r;
    return r;
}

} // namespace

void LossWeights::validate() const {
    if (!(w_l1 >= 0.0) || !(w_ssim >= 0.0) || !(w_lpips >= 0.0))
        fail(ErrorCode::Config, "loss weights must be non-negative");
    if (!(w_l1 > 0.0 || w_ssim > 0.0 || w_lpips > 0.0)) fail(ErrorCode::Config, "at least one loss weight must be positive");
}

LossValue l1_loss(const Image& pred, const Image& target) {
    require_same(pred, target, "l1_loss");
    LossValue out;
    out.gradient = Image(pred.width, pred.height, pred.channels);
    const std::size_t n = pred.data.size();
    if (n == 0) return out;
    const float inv = static_cast<float>(1.0 / static_cast<double>(n));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const float d = pred.data[i] - target.data[i];
        sum += std::abs(static_cast<double>(d));
        out.gradient.data[i] = d > 0.0f ? inv : (d < 0.0f ? -inv : 0.0f);
    }
    out.value = sum / static_cast<double>(n);
    return out;
}

double ssim(const Image& pred, const Image& target) { return ssim_impl(pred, target, nullptr); }

LossValue ssim_loss(const Image& pred, const Image& target) {
    LossValue out;
    out.value = 1.0 - ssim_impl(pred, target, &out.gradient);
    return out;
}

void register_perceptual(const std::string& name, PerceptualFactory factory) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.factories[name] = std::move(factory);
}

std::unique_ptr<PerceptualLoss> make_perceptual(const std::string& name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.factories.find(name);
    return it == r.factories.end() ? nullptr : it->second();
}

std::vector<std::string> registered_perceptual() {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> names;
    for (const auto& [name, _] : r.factories) names.push_back(name);
    return names;
}

LossValue combined_loss(const Image& pred, const Image& target, const LossWeights& weights,
                        const PerceptualLoss* perceptual) {
    weights.validate();
    if (weights.w_lpips > 0.0 && perceptual == nullptr)
        fail(ErrorCode::Config, "perceptual loss weight is positive but no plug-in is registered", "loss.w_lpips");
    require_same(pred, target, "combined_loss");
    LossValue out;
    out.gradient = Image(pred.width, pred.height, pred.channels);
    auto accumulate = [&](double weight, const LossValue& term) {
        out.value += weight * term.value;
        for (std::size_t i = 0; i < out.gradient.data.size(); ++i)
            out.gradient.data[i] += static_cast<float>(weight * term.gradient.data[i]);
    };
    if (weights.w_l1 > 0.0) accumulate(weights.w_l1, l1_loss(pred, target));
    if (weights.w_ssim > 0.0) accumulate(weights.w_ssim, ssim_loss(pred, target));
    if (weights.w_lpips > 0.0) accumulate(weights.w_lpips, perceptual->evaluate(pred, target));
    return out;
}

} // namespace scene_forge
