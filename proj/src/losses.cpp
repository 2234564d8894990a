/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/losses.hpp"

#include <cmath>

namespace splatcurve {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

Var extract_channel(Tape& t, Var img, std::size_t npix, int ch) {
    std::vector<std::size_t> idx(npix);
    for (std::size_t p = 0; p < npix; ++p) idx[p] = 3 * p + ch;
    return gather(t, img, std::move(idx));
}

Var grayscale(Tape& t, Var img, std::size_t npix) {
    Var r = extract_channel(t, img, npix, 0);
    Var g = extract_channel(t, img, npix, 1);
    Var b = extract_channel(t, img, npix, 2);
    return mul_const(t, add(t, add(t, r, g), b), 1.0 / 3.0);
}

Var ssim_channel(Tape& t, Var a, Var b, std::size_t h, std::size_t w) {
    Var mu_a = gaussian_blur11_valid(t, a, h, w);
    Var mu_b = gaussian_blur11_valid(t, b, h, w);
    Var aa = gaussian_blur11_valid(t, mul(t, a, a), h, w);
    Var bb = gaussian_blur11_valid(t, mul(t, b, b), h, w);
    Var ab = gaussian_blur11_valid(t, mul(t, a, b), h, w);
    Var var_a = sub(t, aa, mul(t, mu_a, mu_a));
    Var var_b = sub(t, bb, mul(t, mu_b, mu_b));
    Var cov = sub(t, ab, mul(t, mu_a, mu_b));
    Var num = mul(t, add_const(t, mul_const(t, mul(t, mu_a, mu_b), 2.0), kC1),
                  add_const(t, mul_const(t, cov, 2.0), kC2));
    Var den = mul(t, add_const(t, add(t, mul(t, mu_a, mu_a), mul(t, mu_b, mu_b)), kC1),
                  add_const(t, add(t, var_a, var_b), kC2));
    return mean(t, div_op(t, num, den));
}

}  // namespace

Var ssim_node(Tape& t, Var a, Var b, std::size_t h, std::size_t w) {
    if (t.size(a) != h * w * 3 || t.size(b) != h * w * 3) {
        throw UsageError("ssim_node: size mismatch");
    }
    if (h < 11 || w < 11) throw UsageError("ssim_node: image smaller than window");
    std::size_t npix = h * w;
    Var acc;
    for (int ch = 0; ch < 3; ++ch) {
        Var ca = extract_channel(t, a, npix, ch);
        Var cb = extract_channel(t, b, npix, ch);
        Var s = ssim_channel(t, ca, cb, h, w);
        acc = ch == 0 ? s : add(t, acc, s);
    }
    return mul_const(t, acc, 1.0 / 3.0);
}

Var loss_3dgs_node(Tape& t, Var pred, Var target, std::size_t h, std::size_t w,
                   double lambda) {
    Var l1 = mean(t, abs_op(t, sub(t, pred, target)));
    if (lambda == 0.0) return l1;
    Var ssim = ssim_node(t, pred, target, h, w);
    // DSSIM = (1 - SSIM)/2
    Var dssim = mul_const(t, add_const(t, neg(t, ssim), 1.0), 0.5);
    return add(t, mul_const(t, dssim, lambda), mul_const(t, l1, 1.0 - lambda));
}

Var loss_reg_node(Tape& t, Var pred_in, Var target_in, Var pred_out,
                  Var target_out, std::size_t h, std::size_t w, double lambda) {
    return add(t, loss_3dgs_node(t, pred_in, target_in, h, w, lambda),
               loss_3dgs_node(t, pred_out, target_out, h, w, lambda));
}

Var loss_spa_node(Tape& t, Var pred_out, const Image& input, std::size_t h,
                  std::size_t w) {
    if (input.width != w || input.height != h || t.size(pred_out) != h * w * 3) {
        throw UsageError("loss_spa_node: size mismatch");
    }
    if (h < 8 || w < 8) throw UsageError("loss_spa_node: image too small to pool");
    std::size_t npix = h * w;

    Var gray = grayscale(t, pred_out, npix);
    Var pooled = avgpool_region(t, gray, h, w, 4);
    std::size_t rh = (h + 3) / 4, rw = (w + 3) / 4;

    // Pooled grayscale of the (constant) input view and its scalar mean.
    Vec in_pool(rh * rw, 0.0);
    double in_mean = 0.0;
    {
        Vec in_gray(npix);
        for (std::size_t p = 0; p < npix; ++p) {
            in_gray[p] =
                (input.data[3 * p] + input.data[3 * p + 1] + input.data[3 * p + 2]) / 3.0;
            in_mean += in_gray[p];
        }
        in_mean /= static_cast<double>(npix);
        for (std::size_t ry = 0; ry < rh; ++ry) {
            for (std::size_t rx = 0; rx < rw; ++rx) {
                double acc = 0.0;
                std::size_t cnt = 0;
                for (std::size_t y = ry * 4; y < std::min(h, ry * 4 + 4); ++y) {
                    for (std::size_t x = rx * 4; x < std::min(w, rx * 4 + 4); ++x) {
                        acc += in_gray[y * w + x];
                        ++cnt;
                    }
                }
                in_pool[ry * rw + rx] = acc / static_cast<double>(cnt);
            }
        }
    }
    double scale = 0.5 / in_mean;

    // Ordered 4-neighborhood pairs: each adjacent pair enters twice, which
    // only doubles the sum; normalization is by the region count.
    std::vector<std::size_t> idx_a, idx_b;
    const int dy[4] = {-1, 1, 0, 0};
    const int dx[4] = {0, 0, -1, 1};
    for (std::size_t ry = 0; ry < rh; ++ry) {
        for (std::size_t rx = 0; rx < rw; ++rx) {
            for (int d = 0; d < 4; ++d) {
                long ny = static_cast<long>(ry) + dy[d];
                long nx = static_cast<long>(rx) + dx[d];
                if (ny < 0 || ny >= static_cast<long>(rh) || nx < 0 ||
                    nx >= static_cast<long>(rw)) {
                    continue;
                }
                idx_a.push_back(ry * rw + rx);
                idx_b.push_back(static_cast<std::size_t>(ny) * rw +
                                static_cast<std::size_t>(nx));
            }
        }
    }
    Vec in_diff(idx_a.size());
    for (std::size_t i = 0; i < idx_a.size(); ++i) {
        in_diff[i] = scale * std::abs(in_pool[idx_a[i]] - in_pool[idx_b[i]]);
    }
    Var da = gather(t, pooled, idx_a);
    Var db = gather(t, pooled, idx_b);
    Var out_diff = abs_op(t, sub(t, da, db));
    Var term = square(t, sub(t, out_diff, t.leaf(std::move(in_diff))));
    return mul_const(t, sum(t, term), 1.0 / static_cast<double>(rh * rw));
}

Var delta_saturation_node(Tape& t, Var img) {
    std::size_t sz = t.size(img);
    if (sz % 3 != 0) throw UsageError("delta_saturation_node: expected HWC image");
    std::size_t npix = sz / 3;
    constexpr double kGuard = 1e-8;
    const Vec& x = t.val(img);
    double acc = 0.0;
    for (std::size_t p = 0; p < npix; ++p) {
        double m = (x[3 * p] + x[3 * p + 1] + x[3 * p + 2]) / 3.0;
        if (m < kGuard) continue;
        double mn = std::min({x[3 * p], x[3 * p + 1], x[3 * p + 2]});
        acc += 1.0 - mn / m;
    }
    acc /= static_cast<double>(npix);
    return t.custom(Vec{acc}, [img, npix](Tape& tp, const Vec& g) {
        const Vec& x = tp.val(img);
        Vec& gx = tp.grad_mut(img);
        double go = g[0] / static_cast<double>(npix);
        for (std::size_t p = 0; p < npix; ++p) {
            double m = (x[3 * p] + x[3 * p + 1] + x[3 * p + 2]) / 3.0;
            if (m < kGuard) continue;
            int arg = 0;
            for (int c = 1; c < 3; ++c) {
                if (x[3 * p + c] < x[3 * p + arg]) arg = c;
            }
            double mn = x[3 * p + arg];
            gx[3 * p + arg] += go * (-1.0 / m);
            double dm = go * (mn / (m * m)) / 3.0;
            for (int c = 0; c < 3; ++c) gx[3 * p + c] += dm;
        }
    });
}

Var loss_cc_view_node(Tape& t, Var pred_out, Var s_minkowski, std::size_t h,
                      std::size_t w) {
    if (t.size(pred_out) != h * w * 3) throw UsageError("loss_cc_view_node: size mismatch");
    if (t.size(s_minkowski) != 1) throw UsageError("loss_cc_view_node: S must be scalar");
    std::size_t npix = h * w;
    Var clamped = clamp(t, pred_out, 0.0, 1.0);
    Var chans[3];
    for (int c = 0; c < 3; ++c) chans[c] = extract_channel(t, clamped, npix, c);
    Var inv_s = div_op(t, t.leaf_scalar(1.0), s_minkowski);
    Var pow_c[3];
    for (int c = 0; c < 3; ++c) pow_c[c] = pow_varexp(t, chans[c], s_minkowski);
    const int pairs[3][2] = {{0, 1}, {1, 2}, {0, 2}};
    Var acc;
    for (int k = 0; k < 3; ++k) {
        Var diff = mean(t, abs_op(t, sub(t, pow_c[pairs[k][0]], pow_c[pairs[k][1]])));
        Var d = pow_varexp(t, diff, inv_s);
        acc = k == 0 ? d : add(t, acc, d);
    }
    Var gray_world = mul_const(t, acc, 1.0 / 3.0);
    Var delta = delta_saturation_node(t, clamped);
    return sub(t, gray_world, mul_const(t, delta, 0.1));
}

Var loss_curve_node(Tape& t, Var curve, const Vec& cdf_target, Var prior_power,
                    Var prior_s, double omega) {
    if (t.size(curve) != 256 || cdf_target.size() != 256 ||
        t.size(prior_power) != 256 || t.size(prior_s) != 256) {
        throw UsageError("loss_curve_node: curves must have 256 entries");
    }
    Var cdf = t.leaf(cdf_target);
    Var init_term = mean(t, square(t, sub(t, curve, cdf)));
    Var prior = mul(t, prior_power, prior_s);
    Var prior_term = mean(t, square(t, sub(t, curve, prior)));
    return add(t, mul_const(t, init_term, omega), mul_const(t, prior_term, 0.5));
}

Var loss_tv_node(Tape& t, Var curve) {
    if (t.size(curve) != 256) throw UsageError("loss_tv_node: curve must have 256 entries");
    std::vector<std::size_t> hi(255), lo(255);
    for (std::size_t i = 0; i < 255; ++i) {
        hi[i] = i + 1;
        lo[i] = i;
    }
    Var diff = sub(t, gather(t, curve, std::move(hi)), gather(t, curve, std::move(lo)));
    return mul_const(t, sum(t, square(t, diff)), 1.0 / 255.0);
}

Var loss_total_node(Tape& t, Var reg, Var spa, Var tv, Var curve, Var cc,
                    double eta) {
    Var total = add(t, add(t, reg, spa), tv);
    total = add(t, total, mul_const(t, curve, 10.0));
    return add(t, total, mul_const(t, cc, eta));
}

}  // namespace splatcurve
