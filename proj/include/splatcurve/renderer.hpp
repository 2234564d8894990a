/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#pragma once

#include "splatcurve/gaussians.hpp"
#include "splatcurve/image.hpp"
#include "splatcurve/tape.hpp"

namespace splatcurve {

/// Screen-space projection of one Gaussian: EWA covariance J W Sigma W^T J^T
/// plus 0.3 px^2 dilation, pixel-space mean, camera depth, and the 3-sigma
/// footprint bounding box.
struct Projection {
    bool visible = false;  // false when culled (behind near plane)
    double mean_x = 0, mean_y = 0;
    double cov_a = 0, cov_b = 0, cov_c = 0;        // screen covariance (symmetric)
    double inv_a = 0, inv_b = 0, inv_c = 0;        // its inverse
    double depth = 0;
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;          // inclusive pixel bbox
};

Projection project(const Gaussian& g, const Camera& cam);

struct RenderedPair {
    Image input_render;     // from base colors c
    Image adjusted_render;  // from c_out = a*c + b
    std::vector<double> transmittance;  // per pixel, in [0,1]
};

/// Plain (non-differentiable) dual render with front-to-back compositing and
/// early exit at transmittance < 1e-4.
RenderedPair render_dual(const GaussianCloud& cloud, const Camera& cam,
                         const std::array<double, 3>& background = {0, 0, 0});

/// Single-image render using only the adjusted colors (inference path).
Image render_adjusted(const GaussianCloud& cloud, const Camera& cam,
                      const std::array<double, 3>& background = {0, 0, 0});
Image render_base(const GaussianCloud& cloud, const Camera& cam,
                  const std::array<double, 3>& background = {0, 0, 0});

/// Tape-bound appearance (and optionally geometry) parameters for one cloud.
/// Sizes: colors/gains/offsets 3N, logits N, mu/log_scales 3N, quats 4N.
/// Geometry Vars may be left invalid; geometry then comes from the cloud
/// and receives no gradients.
struct RenderVars {
    Var colors, gains, offsets, logits;
    Var mu, log_scales, quats;
    bool geometry() const { return mu.valid(); }
};

/// Differentiable dual render. Output value is [C_in_hat | C_out_hat], both
/// HWC flat (size 2*H*W*3). Gradients flow to colors, gains, offsets and
/// opacity logits, and to geometry when bound. Transmittance is written to
/// `transmittance_out` if non-null (not differentiated).
Var render_dual_node(Tape& t, const GaussianCloud& cloud, const Camera& cam,
                     const RenderVars& vars,
                     const std::array<double, 3>& background = {0, 0, 0},
                     std::vector<double>* transmittance_out = nullptr);

}  // namespace splatcurve
