// SPDX-FileCopyrightText: 2026 scene-forge authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "image.hpp"

namespace scene_forge {

struct AlignmentParams {
    int guided_filter_radius = 9;
    double guided_filter_eps = 1e-4;
    int dilation_iters = 25;
    double alpha_threshold = 0.5;

    void validate() const;
};

/// Median(rendered) / Median(estimated) over jointly valid pixels.
double median_scale(const DepthMap& estimated_ref, const DepthMap& rendered_ref);

/// Median of the valid entries (mean of the two middle values for even counts).
double valid_median(const DepthMap& depth);

/// He et al. guided filter. Window statistics skip pixels invalid in either input or guide;
/// output is invalid where the guide is invalid or no window statistics exist.
DepthMap guided_filter(const DepthMap& input, const DepthMap& guide, int radius, double eps);

/// Scales the estimate, guided-filters it against a guide that is the rendered depth on known
/// pixels (mask == 0) and the scaled estimate elsewhere, then keeps rendered depth on known
/// pixels. Depths are normalized by the guide median before filtering so eps is scale free.
DepthMap depth_align(const DepthMap& estimated, const DepthMap& rendered, const BinaryMask& unknown,
                     double scale, const AlignmentParams& params);

/// `iters` passes of 3x3 eight-connected dilation.
BinaryMask dilate(const BinaryMask& mask, int iters);

/// True where alpha < threshold, i.e. pixels the scene does not cover yet.
BinaryMask mask_from_alpha(const Image& alpha, double threshold);

/// Unknown-region mask after growing the covered region by `dilation_iters`.
BinaryMask unknown_region(const Image& alpha, const AlignmentParams& params);

} // namespace scene_forge
