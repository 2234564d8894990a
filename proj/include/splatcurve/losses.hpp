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

#include "splatcurve/image.hpp"
#include "splatcurve/tape_ops.hpp"

namespace splatcurve {

/// SSIM between two HWC image Vars (11x11 Gaussian window, sigma 1.5,
/// C1=0.01^2, C2=0.03^2, valid windows only, per channel then averaged).
/// Requires min(h,w) >= 11.
Var ssim_node(Tape& t, Var a, Var b, std::size_t h, std::size_t w);

/// lambda * DSSIM + (1-lambda) * mean-abs, DSSIM = (1-SSIM)/2.
Var loss_3dgs_node(Tape& t, Var pred, Var target, std::size_t h, std::size_t w,
                   double lambda);

Var loss_reg_node(Tape& t, Var pred_in, Var target_in, Var pred_out,
                  Var target_out, std::size_t h, std::size_t w, double lambda);

/// Spatial-consistency loss: grayscale, 4x4-region average pooling, squared
/// mismatch of neighbor differences against the input scaled by
/// 0.5/mean(input), averaged over regions. Requires min(h,w) >= 8.
Var loss_spa_node(Tape& t, Var pred_out, const Image& input, std::size_t h,
                  std::size_t w);

/// Per-view gray-world (Shades-of-Gray) term with a saturation bonus:
/// mean over channel pairs of (mean|p^S - q^S|)^(1/S) minus 0.1 * delta,
/// delta = mean(1 - min_channel/mean_channel) with near-black pixels
/// contributing 0. Result for one view; callers average over views.
Var loss_cc_view_node(Tape& t, Var pred_out, Var s_minkowski, std::size_t h,
                      std::size_t w);

/// Mean per-pixel saturation term delta (exposed for tests).
Var delta_saturation_node(Tape& t, Var img);

/// omega * mean((L - L_cdf)^2) + 0.5 * mean((L - L_po .* L_s)^2).
Var loss_curve_node(Tape& t, Var curve, const Vec& cdf_target, Var prior_power,
                    Var prior_s, double omega);

/// (1/255) * sum of squared LUT increments.
Var loss_tv_node(Tape& t, Var curve);

struct LossWeights {
    double lambda = 0.2;
    double eta = 0.005;    // 0.1 when color degradation is present
    double omega = 1.0;    // 0.1 from iteration 3000 onward
};

/// L_reg + L_spa + L_tv + 10 * L_curve + eta * L_cc.
Var loss_total_node(Tape& t, Var reg, Var spa, Var tv, Var curve, Var cc,
                    double eta);

}  // namespace splatcurve
