/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/colorxform.hpp"

#include <algorithm>
#include <cmath>

namespace splatcurve {

ToneCurve ToneCurve::identity() {
    ToneCurve c;
    for (int i = 0; i < 256; ++i) c.entries[i] = i / 255.0;
    return c;
}

ToneCurve ToneCurve::constant(double v) {
    ToneCurve c;
    c.entries.fill(v);
    return c;
}

ToneCurve ToneCurve::from_vec(const Vec& v) {
    if (v.size() != 256) throw UsageError("ToneCurve: expected 256 entries");
    ToneCurve c;
    std::copy(v.begin(), v.end(), c.entries.begin());
    return c;
}

ToneCurve compose_curve(const ToneCurve& global, const ToneCurve& bias) {
    ToneCurve out;
    for (int i = 0; i < 256; ++i) out.entries[i] = global.entries[i] + bias.entries[i];
    return out;
}

double apply_curve_scalar(double v, const ToneCurve& curve) {
    double x = std::min(1.0, std::max(0.0, v));
    double pos = x * 255.0;
    int k = std::min(static_cast<int>(pos), 254);
    double f = pos - k;
    return (1.0 - f) * curve.entries[k] + f * curve.entries[k + 1];
}

Image apply_curve(const Image& img, const ToneCurve& curve) {
    Image out = img;
    for (double& v : out.data) v = apply_curve_scalar(v, curve);
    return out;
}

ToneCurve power_curve(double g_exponent) {
    if (g_exponent <= 0.0) throw UsageError("power_curve: G must be positive");
    ToneCurve c;
    for (int i = 0; i < 256; ++i) {
        c.entries[i] = std::pow(i / 255.0 + kCurveEps, g_exponent);
    }
    return c;
}

ToneCurve s_curve(double a_pivot, double b_exponent) {
    if (a_pivot <= 0.0 || a_pivot >= 1.0 || b_exponent <= 0.0) {
        throw UsageError("s_curve: need 0 < A < 1 and B > 0");
    }
    ToneCurve c;
    for (int i = 0; i < 256; ++i) {
        double x = i / 255.0;
        if (x <= a_pivot) {
            c.entries[i] = a_pivot - a_pivot * std::pow(1.0 - x / a_pivot, b_exponent);
        } else {
            c.entries[i] =
                a_pivot + (1.0 - a_pivot) * std::pow((x - a_pivot) / (1.0 - a_pivot), b_exponent);
        }
    }
    return c;
}

ToneCurve cdf_curve(const Image& img) {
    std::array<double, 256> hist{};
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        double g = (img.data[3 * p] + img.data[3 * p + 1] + img.data[3 * p + 2]) / 3.0;
        int bin = std::min(static_cast<int>(std::min(1.0, std::max(0.0, g)) * 256.0), 255);
        hist[bin] += 1.0;
    }
    ToneCurve c;
    double acc = 0.0;
    double total = static_cast<double>(img.pixel_count());
    for (int i = 0; i < 256; ++i) {
        acc += hist[i];
        c.entries[i] = acc / total;
    }
    return c;
}

double det3(const Mat3& a) {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Mat3 invert3(const Mat3& a) {
    double det = det3(a);
    if (std::abs(det) < kDetGuard) throw NumericError("singular color matrix");
    double id = 1.0 / det;
    return Mat3{(a[4] * a[8] - a[5] * a[7]) * id, (a[2] * a[7] - a[1] * a[8]) * id,
                (a[1] * a[5] - a[2] * a[4]) * id, (a[5] * a[6] - a[3] * a[8]) * id,
                (a[0] * a[8] - a[2] * a[6]) * id, (a[2] * a[3] - a[0] * a[5]) * id,
                (a[3] * a[7] - a[4] * a[6]) * id, (a[1] * a[6] - a[0] * a[7]) * id,
                (a[0] * a[4] - a[1] * a[3]) * id};
}

Mat3 identity3() { return Mat3{1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Image apply_matrix(const Image& img, const Mat3& m) {
    if (std::abs(det3(m)) < kDetGuard) throw NumericError("singular color matrix");
    Image out = img;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const double* x = &img.data[3 * p];
        for (int j = 0; j < 3; ++j) {
            out.data[3 * p + j] = x[0] * m[j] + x[1] * m[3 + j] + x[2] * m[6 + j];
        }
    }
    return out;
}

Image global_adjust(const Image& img, const Mat3& m, const ToneCurve& curve) {
    Image mapped = apply_matrix(img, m);
    for (double& v : mapped.data) v = std::min(1.0, std::max(0.0, v));
    Image curved = apply_curve(mapped, curve);
    return apply_matrix(curved, invert3(m));
}

Var power_curve_node(Tape& t, Var g_exponent) {
    if (t.size(g_exponent) != 1) throw UsageError("power_curve_node: G must be scalar");
    double g = t.scalar(g_exponent);
    Vec out(256);
    for (int i = 0; i < 256; ++i) out[i] = std::pow(i / 255.0 + kCurveEps, g);
    return t.custom(std::move(out), [g_exponent](Tape& tp, const Vec& grad) {
        double g = tp.scalar(g_exponent);
        double acc = 0.0;
        for (int i = 0; i < 256; ++i) {
            double base = i / 255.0 + kCurveEps;
            acc += std::pow(base, g) * std::log(base) * grad[i];
        }
        tp.grad_mut(g_exponent)[0] += acc;
    });
}

Var s_curve_node(Tape& t, Var a_pivot, Var b_exponent) {
    if (t.size(a_pivot) != 1 || t.size(b_exponent) != 1) {
        throw UsageError("s_curve_node: A and B must be scalars");
    }
    double a = t.scalar(a_pivot);
    double b = t.scalar(b_exponent);
    Vec out(256);
    for (int i = 0; i < 256; ++i) {
        double x = i / 255.0;
        out[i] = x <= a ? a - a * std::pow(1.0 - x / a, b)
                        : a + (1.0 - a) * std::pow((x - a) / (1.0 - a), b);
    }
    return t.custom(std::move(out), [a_pivot, b_exponent](Tape& tp, const Vec& grad) {
        double a = tp.scalar(a_pivot);
        double b = tp.scalar(b_exponent);
        double ga = 0.0, gb = 0.0;
        for (int i = 0; i < 256; ++i) {
            double x = i / 255.0;
            if (x <= a) {
                double u = 1.0 - x / a;
                double ub = std::pow(u, b);
                ga += (1.0 - ub - (u > 0.0 ? b * std::pow(u, b - 1.0) * x / a : 0.0)) * grad[i];
                gb += (u > 0.0 ? -a * ub * std::log(u) : 0.0) * grad[i];
            } else {
                double v = (x - a) / (1.0 - a);
                double vb = std::pow(v, b);
                ga += (1.0 - vb + (v > 0.0 ? b * std::pow(v, b - 1.0) * (x - 1.0) / (1.0 - a) : 0.0)) *
                      grad[i];
                gb += (v > 0.0 ? (1.0 - a) * vb * std::log(v) : 0.0) * grad[i];
            }
        }
        tp.grad_mut(a_pivot)[0] += ga;
        tp.grad_mut(b_exponent)[0] += gb;
    });
}

Var global_adjust_node(Tape& t, Var img, Var m, Var lut) {
    Var mapped = rowwise_mat3(t, img, m);
    Var clamped = clamp(t, mapped, 0.0, 1.0);
    Var curved = lut_apply(t, clamped, lut);
    Var minv = inverse3(t, m);
    return rowwise_mat3(t, curved, minv);
}

}  // namespace splatcurve
