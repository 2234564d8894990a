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

#include <vector>

#include "splatcurve/tape.hpp"

namespace splatcurve {

// Elementwise binary ops. Operands must have equal size, or one of them may
// be a scalar (size 1), which broadcasts.
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var div_op(Tape& t, Var a, Var b);

Var add_const(Tape& t, Var a, double c);
Var mul_const(Tape& t, Var a, double c);
Var neg(Tape& t, Var a);

Var sum(Tape& t, Var a);
Var mean(Tape& t, Var a);

Var abs_op(Tape& t, Var a);   // subgradient 0 at the kink
Var square(Tape& t, Var a);
Var sqrt_op(Tape& t, Var a);
Var exp_op(Tape& t, Var a);
Var log_op(Tape& t, Var a);
Var tanh_op(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var gelu(Tape& t, Var a);     // exact erf form
Var pow_const(Tape& t, Var a, double p);

// y = base^e with scalar exponent e. Entries with base <= 0 produce 0 with
// zero gradient on both sides, so x^s and m^(1/s) stay well-defined at 0.
Var pow_varexp(Tape& t, Var base, Var expo);

// Hard clamp; gradient is identity inside [lo, hi] and zero outside.
Var clamp(Tape& t, Var a, double lo, double hi);

Var slice(Tape& t, Var a, std::size_t offset, std::size_t len);
Var concat(Tape& t, const std::vector<Var>& parts);
Var gather(Tape& t, Var a, std::vector<std::size_t> idx);

// out[p,:] = in[p,:] * M for an n_pixels x 3 array and row-vector convention.
Var rowwise_mat3(Tape& t, Var img, Var m);

// Exact 3x3 inverse; throws NumericError("singular color matrix") when
// |det| < 1e-6. Backward uses dM^-1 = -M^-1 dM M^-1.
Var inverse3(Tape& t, Var m);

// 256-entry LUT applied with linear interpolation at clamp(v,0,1)*255.
// Differentiable in v (active-segment slope, zero outside [0,1]) and in the
// two bracketing entries.
Var lut_apply(Tape& t, Var v, Var lut);

// C = A(p x q) * B(q x r), row-major.
Var matmul(Tape& t, Var a, Var b, std::size_t p, std::size_t q, std::size_t r);
Var add_rowbroadcast(Tape& t, Var a, Var bias, std::size_t rows, std::size_t cols);
Var softmax(Tape& t, Var a);

// Per-pixel channel minimum of an interleaved HWC image with C=3;
// subgradient goes to the first minimal channel.
Var channel_min3(Tape& t, Var img);

enum class PadMode { kZero, kReflect };

// Dense conv, CHW layout. weights: out_ch x in_ch x k x k, bias: out_ch.
Var conv2d(Tape& t, Var input, std::size_t in_ch, std::size_t h, std::size_t w,
           Var weights, Var bias, std::size_t out_ch, std::size_t k,
           std::size_t stride, std::size_t pad, PadMode mode);

// Depthwise k x k conv with reflect padding (ConvNeXt-style spatial mixing).
Var depthwise_conv(Tape& t, Var input, std::size_t ch, std::size_t h,
                   std::size_t w, Var weights, Var bias, std::size_t k);

// LayerNorm across channels at each spatial position. gamma/beta: ch.
Var layernorm_channels(Tape& t, Var input, std::size_t ch, std::size_t hw,
                       Var gamma, Var beta);

// Adaptive average pooling, CHW -> C x oh x ow with contiguous bins.
Var avgpool_to(Tape& t, Var input, std::size_t ch, std::size_t h,
               std::size_t w, std::size_t oh, std::size_t ow);

// Non-overlapping k x k average pooling of a single-channel map; trailing
// partial windows average over their actual extent.
Var avgpool_region(Tape& t, Var input, std::size_t h, std::size_t w,
                   std::size_t k);

// 11x11 Gaussian blur (sigma 1.5), valid region only: (h-10) x (w-10).
Var gaussian_blur11_valid(Tape& t, Var input, std::size_t h, std::size_t w);

Var hwc_to_chw(Tape& t, Var img, std::size_t h, std::size_t w, std::size_t c);
Var chw_to_hwc(Tape& t, Var img, std::size_t c, std::size_t h, std::size_t w);

}  // namespace splatcurve
