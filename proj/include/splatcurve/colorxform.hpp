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

#include <array>

#include "splatcurve/image.hpp"
#include "splatcurve/tape.hpp"
#include "splatcurve/tape_ops.hpp"

namespace splatcurve {

/// 256-entry lookup table over the input grid i/255.
struct ToneCurve {
    std::array<double, 256> entries{};

    static ToneCurve identity();
    static ToneCurve constant(double c);

    Vec to_vec() const { return Vec(entries.begin(), entries.end()); }
    static ToneCurve from_vec(const Vec& v);
};

/// Pointwise sum L_k = L_g + L_b.
ToneCurve compose_curve(const ToneCurve& global, const ToneCurve& bias);

/// Linear interpolation lookup at clamp(v,0,1)*255 (plain, non-tape path).
double apply_curve_scalar(double v, const ToneCurve& curve);
Image apply_curve(const Image& img, const ToneCurve& curve);

constexpr double kCurveEps = 1e-4;

/// y = (x + eps)^G sampled on the 256-grid.
ToneCurve power_curve(double g_exponent);
/// Two-branch S-curve with pivot A in (0,1) and exponent B > 0.
ToneCurve s_curve(double a_pivot, double b_exponent);

/// CDF of the 256-bin grayscale histogram (mean of R,G,B per pixel),
/// normalized so the last entry is 1.
ToneCurve cdf_curve(const Image& img);

using Mat3 = std::array<double, 9>;  // row-major

constexpr double kDetGuard = 1e-6;

double det3(const Mat3& m);
Mat3 invert3(const Mat3& m);  // throws NumericError on |det| < kDetGuard
Mat3 identity3();

/// Row-vector convention: out_pixel = [r,g,b] * M (plain path; values may
/// leave [0,1]).
Image apply_matrix(const Image& img, const Mat3& m);

/// Plain global adjustment: apply_matrix -> clamp -> curve -> inverse matrix.
Image global_adjust(const Image& img, const Mat3& m, const ToneCurve& curve);

// ---- Differentiable (tape) counterparts ----

/// Prior curves as tape nodes over scalar parameter Vars.
Var power_curve_node(Tape& t, Var g_exponent);
Var s_curve_node(Tape& t, Var a_pivot, Var b_exponent);

/// img (HWC flat) * M, values may leave [0,1].
inline Var apply_matrix_node(Tape& t, Var img, Var m) { return rowwise_mat3(t, img, m); }

/// Matrix map -> clamp to [0,1] -> LUT -> inverse matrix map.
Var global_adjust_node(Tape& t, Var img, Var m, Var lut);

}  // namespace splatcurve
