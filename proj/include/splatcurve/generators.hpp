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

#include "splatcurve/image.hpp"
#include "splatcurve/param.hpp"
#include "splatcurve/tape_ops.hpp"

namespace splatcurve {

/// View-adaptive generator: image trunk (avgpool to 32x32, two stride-2 3x3
/// convs 3->16->16 with GeLU, 64 tokens of dim 16), camera-matrix query,
/// single-head cross-attention, feed-forward 16->64->out_dim. The output head
/// is zero-initialized so the generator starts as the zero function.
struct GeneratorWeights {
    std::size_t out_dim = 0;
    Parameter conv1_w, conv1_b;  // 16 x 3 x 3 x 3
    Parameter conv2_w, conv2_b;  // 16 x 16 x 3 x 3
    Parameter key_w, key_b;      // 16 x 16
    Parameter value_w, value_b;  // 16 x 16
    Parameter query_w, query_b;  // 16 x 16 (flattened 4x4 camera matrix in)
    Parameter ff1_w, ff1_b;      // 16 x 64
    Parameter ff2_w, ff2_b;      // 64 x out_dim, zero-initialized

    static GeneratorWeights init(std::size_t out_dim, std::uint64_t seed,
                                 const std::string& prefix);
    std::vector<Parameter*> all();
};

struct GeneratorVars {
    Var conv1_w, conv1_b, conv2_w, conv2_b;
    Var key_w, key_b, value_w, value_b, query_w, query_b;
    Var ff1_w, ff1_b, ff2_w, ff2_b;
};

GeneratorVars bind_generator(ParamSet& ps, GeneratorWeights& w);

/// Forward pass; output has w.out_dim entries. Throws NumericError on
/// non-finite activations.
Var generator_forward(Tape& t, const GeneratorVars& v, const Image& img,
                      const std::array<double, 16>& camera_matrix,
                      std::size_t out_dim);

/// Squashed per-view scalars from a raw 4-vector:
/// S = 1 + 11 sigmoid, G = exp(tanh * ln4), A = 0.05 + 0.9 sigmoid,
/// B = exp(tanh * ln4). Raw zeros give S=6.5, G=1, A=0.5, B=1.
struct ViewScalarVars {
    Var s_minkowski, g_power, a_pivot, b_exponent;
};

ViewScalarVars squash_view_scalars(Tape& t, Var raw4);

}  // namespace splatcurve
