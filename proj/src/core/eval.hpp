// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <optional>
#include <vector>

#include "geometry.hpp"
#include "image.hpp"

namespace scene_forge {

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) on unit-range images, capped at 99 dB.
double psnr(const Image& pred, const Image& target);

struct CameraError {
    double r_err = 0.0; // radians
    double t_err = 0.0; // normalized translation units
};

/// Both trajectories are expressed relative to their first frame. r_err is the mean geodesic
/// angle between relative rotations and t_err the mean distance between relative translations
/// after dividing each trajectory by its largest relative translation. Frame 0 is identical by
/// construction and left out of both means.
CameraError camera_error(const std::vector<CameraPose>& pred, const std::vector<CameraPose>& gt);

struct FrameMetrics {
    double psnr = 0.0;
    double ssim = 0.0;
};

struct MetricReport {
    std::vector<FrameMetrics> per_frame;
    double psnr_mean = 0.0;
    double ssim_mean = 0.0;
    std::optional<CameraError> camera;

    nlohmann::json to_json() const;
};

/// Per-frame PSNR and SSIM of equally long image lists.
MetricReport evaluate_frames(const std::vector<Image>& pred, const std::vector<Image>& target);

} // namespace scene_forge
