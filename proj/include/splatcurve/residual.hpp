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

#include <cstdint>

#include "splatcurve/colorxform.hpp"
#include "splatcurve/image.hpp"
#include "splatcurve/param.hpp"
#include "splatcurve/tape_ops.hpp"

namespace splatcurve {

/// Local residual branch: 1x1 stem 3->16, three ConvNeXt-style blocks at
/// width 16 (7x7 depthwise reflect-pad conv, per-pixel channel LayerNorm,
/// 1x1 16->64, GeLU, 1x1 64->16, residual add), zero-initialized 1x1 head
/// 16->3, hard clamp to [-clip, clip].
struct ResidualBlockWeights {
    Parameter dw_w, dw_b;      // 16 x 7 x 7 depthwise
    Parameter ln_gamma, ln_beta;
    Parameter pw1_w, pw1_b;    // 1x1, 16 -> 64
    Parameter pw2_w, pw2_b;    // 1x1, 64 -> 16
};

struct ResidualWeights {
    double clip = 0.1;  // 0.1 for lightness scenarios, 0.5 for color
    Parameter stem_w, stem_b;  // 1x1, 3 -> 16
    ResidualBlockWeights blocks[3];
    Parameter head_w, head_b;  // 1x1, 16 -> 3, zero-initialized

    static ResidualWeights init(double clip, std::uint64_t seed);
    std::vector<Parameter*> all();
};

struct ResidualBlockVars {
    Var dw_w, dw_b, ln_gamma, ln_beta, pw1_w, pw1_b, pw2_w, pw2_b;
};

struct ResidualVars {
    Var stem_w, stem_b;
    ResidualBlockVars blocks[3];
    Var head_w, head_b;
};

ResidualVars bind_residual(ParamSet& ps, ResidualWeights& w);

/// Residual map for an HWC image Var; output is HWC in [-clip, clip].
Var residual_forward(Tape& t, const ResidualVars& v, Var img, std::size_t h,
                     std::size_t w, double clip);

/// Pseudo-enhanced label: clamp(global_adjust(img, M, L) + residual, 0, 1).
Var pseudo_enhance_node(Tape& t, Var img, std::size_t h, std::size_t w, Var m,
                        Var lut, const ResidualVars& rv, double clip);

}  // namespace splatcurve
