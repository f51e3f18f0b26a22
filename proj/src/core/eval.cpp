// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#include "eval.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "loss.hpp"

namespace scene_forge {

double psnr(const Image& pred, const Image& target) {
    if (!pred.same_shape(target)) fail(ErrorCode::Shape, "psnr: image shapes differ");
    if (pred.data.empty()) fail(ErrorCode::EmptyInput, "psnr: empty images");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - target.data[i];
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(pred.data.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

// Chordal form ||A - B||_F = 2 sqrt(2) sin(theta / 2). Unlike acos of the trace it is exactly
// zero for equal rotations and well conditioned at small angles.
double geodesic(const Mat3& a, const Mat3& b) {
    const double s = std::min(1.0, (a - b).norm() / (2.0 * std::sqrt(2.0)));
    return 2.0 * std::asin(s);
}

std::vector<CameraPose> to_first_frame(const std::vector<CameraPose>& poses) {
    std::vector<CameraPose> out;
    for (const auto& p : poses) out.push_back(relative(poses.front(), p));
    return out;
}

double max_translation(const std::vector<CameraPose>& rel) {
    double m = 0.0;
    for (const auto& p : rel) m = std::max(m, p.translation.norm());
    return m;
}

} // namespace

CameraError camera_error(const std::vector<CameraPose>& pred, const std::vector<CameraPose>& gt) {
    if (pred.size() != gt.size()) fail(ErrorCode::Shape, "camera_error: trajectory lengths differ");
    if (pred.size() < 2) fail(ErrorCode::Parameter, "camera_error: need at least two frames");
    const auto rp = to_first_frame(pred);
    const auto rg = to_first_frame(gt);
    const double np = max_translation(rp), ng = max_translation(rg);
    if (np == 0.0 || ng == 0.0) fail(ErrorCode::DegenerateDepth, "camera_error: static trajectory has no scale");
    CameraError e;
    for (std::size_t i = 1; i < rp.size(); ++i) {
        e.r_err += geodesic(rp[i].rotation, rg[i].rotation);
        e.t_err += (rp[i].translation / np - rg[i].translation / ng).norm();
    }
    const double n = static_cast<double>(rp.size() - 1);
    e.r_err /= n;
    e.t_err /= n;
    return e;
}

MetricReport evaluate_frames(const std::vector<Image>& pred, const std::vector<Image>& target) {
    if (pred.size() != target.size()) fail(ErrorCode::Shape, "eval: frame counts differ");
    if (pred.empty()) fail(ErrorCode::EmptyInput, "eval: no frames");
    MetricReport report;
    report.per_frame.resize(pred.size());
    tbb::parallel_for(std::size_t{0}, pred.size(), [&](std::size_t i) {
        report.per_frame[i] = {psnr(pred[i], target[i]), ssim(pred[i], target[i])};
    });
    for (const auto& f : report.per_frame) {
        report.psnr_mean += f.psnr;
        report.ssim_mean += f.ssim;
    }
    report.psnr_mean /= static_cast<double>(pred.size());
    report.ssim_mean /= static_cast<double>(pred.size());
    return report;
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : per_frame) frames.push_back({{"psnr", f.psnr}, {"ssim", f.ssim}});
    nlohmann::json j = {{"psnr_mean", psnr_mean}, {"ssim_mean", ssim_mean}, {"per_frame", frames}};
    j["r_err"] = camera ? nlohmann::json(camera->r_err) : nlohmann::json(nullptr);
    j["t_err"] = camera ? nlohmann::json(camera->t_err) : nlohmann::json(nullptr);
    return j;
}

} // namespace scene_forge
