/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace splatcurve {

namespace {

constexpr double kDilation = 0.3;       // px^2 low-pass added to screen covariance
constexpr double kEarlyExitT = 1e-4;
// Footprint cutoff: alpha below this never contributes, so the bbox radius is
// max(3 sigma, the radius where o*exp(-q/2) crosses it). Keeps the footprint
// truncation below the compositing oracle tolerance.
constexpr double kAlphaCutoff = 1e-8;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Mat23 {
    double m[2][3];
};

struct ProjScratch {
    double p_cam[3];
    double w_rot[3][3];
    Mat23 jw;            // J * W
    double sigma3[3][3];
    double rot[3][3];
    double s2[3];        // exp(2*log_scale)
};

void quat_to_rot(const double qr[4], double r[3][3]) {
    double n = std::sqrt(qr[0] * qr[0] + qr[1] * qr[1] + qr[2] * qr[2] + qr[3] * qr[3]);
    double w = qr[0] / n, x = qr[1] / n, y = qr[2] / n, z = qr[3] / n;
    r[0][0] = 1 - 2 * (y * y + z * z);
    r[0][1] = 2 * (x * y - w * z);
    r[0][2] = 2 * (x * z + w * y);
    r[1][0] = 2 * (x * y + w * z);
    r[1][1] = 1 - 2 * (x * x + z * z);
    r[1][2] = 2 * (y * z - w * x);
    r[2][0] = 2 * (x * z - w * y);
    r[2][1] = 2 * (y * z + w * x);
    r[2][2] = 1 - 2 * (x * x + y * y);
}

Projection project_impl(const double mu[3], const double ls[3], const double quat[4],
                        double opacity, const Camera& cam, ProjScratch* scratch) {
    Projection pr;
    const auto& wtc = cam.world_to_camera;
    double w_rot[3][3] = {{wtc[0], wtc[1], wtc[2]},
                          {wtc[4], wtc[5], wtc[6]},
                          {wtc[8], wtc[9], wtc[10]}};
    double t[3] = {wtc[3], wtc[7], wtc[11]};
    double p[3];
    for (int i = 0; i < 3; ++i) {
        p[i] = w_rot[i][0] * mu[0] + w_rot[i][1] * mu[1] + w_rot[i][2] * mu[2] + t[i];
    }
    if (p[2] <= cam.near) return pr;  // culled

    double z = p[2];
    pr.depth = z;
    pr.mean_x = cam.fx * p[0] / z + cam.cx;
    pr.mean_y = cam.fy * p[1] / z + cam.cy;

    // J (2x3 perspective Jacobian at the camera-space mean) times W.
    double j[2][3] = {{cam.fx / z, 0.0, -cam.fx * p[0] / (z * z)},
                      {0.0, cam.fy / z, -cam.fy * p[1] / (z * z)}};
    Mat23 jw;
    for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 3; ++k) {
            jw.m[i][k] = j[i][0] * w_rot[0][k] + j[i][1] * w_rot[1][k] + j[i][2] * w_rot[2][k];
        }
    }

    double rot[3][3];
    quat_to_rot(quat, rot);
    double s2[3] = {std::exp(2.0 * ls[0]), std::exp(2.0 * ls[1]), std::exp(2.0 * ls[2])};
    double sigma3[3][3];
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            sigma3[i][k] = rot[i][0] * s2[0] * rot[k][0] + rot[i][1] * s2[1] * rot[k][1] +
                           rot[i][2] * s2[2] * rot[k][2];
        }
    }

    // Screen covariance M Sigma M^T + dilation.
    double ms[2][3];
    for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 3; ++k) {
            ms[i][k] = jw.m[i][0] * sigma3[0][k] + jw.m[i][1] * sigma3[1][k] +
                       jw.m[i][2] * sigma3[2][k];
        }
    }
    double a = ms[0][0] * jw.m[0][0] + ms[0][1] * jw.m[0][1] + ms[0][2] * jw.m[0][2] + kDilation;
    double b = ms[0][0] * jw.m[1][0] + ms[0][1] * jw.m[1][1] + ms[0][2] * jw.m[1][2];
    double c = ms[1][0] * jw.m[1][0] + ms[1][1] * jw.m[1][1] + ms[1][2] * jw.m[1][2] + kDilation;

    double det = a * c - b * b;
    if (det <= 0.0) return pr;
    pr.cov_a = a;
    pr.cov_b = b;
    pr.cov_c = c;
    pr.inv_a = c / det;
    pr.inv_b = -b / det;
    pr.inv_c = a / det;

    double mid = 0.5 * (a + c);
    double lam_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
    if (opacity <= kAlphaCutoff) return pr;
    double nsig2 = std::max(9.0, 2.0 * std::log(opacity / kAlphaCutoff));
    double radius = std::sqrt(nsig2 * lam_max);

    pr.x0 = std::max(0, static_cast<int>(std::floor(pr.mean_x - radius)));
    pr.x1 = std::min(static_cast<int>(cam.width) - 1,
                     static_cast<int>(std::ceil(pr.mean_x + radius)));
    pr.y0 = std::max(0, static_cast<int>(std::floor(pr.mean_y - radius)));
    pr.y1 = std::min(static_cast<int>(cam.height) - 1,
                     static_cast<int>(std::ceil(pr.mean_y + radius)));
    if (pr.x0 > pr.x1 || pr.y0 > pr.y1) return pr;
    pr.visible = true;

    if (scratch) {
        std::copy(p, p + 3, scratch->p_cam);
        std::copy(&w_rot[0][0], &w_rot[0][0] + 9, &scratch->w_rot[0][0]);
        scratch->jw = jw;
        std::copy(&sigma3[0][0], &sigma3[0][0] + 9, &scratch->sigma3[0][0]);
        std::copy(&rot[0][0], &rot[0][0] + 9, &scratch->rot[0][0]);
        std::copy(s2, s2 + 3, scratch->s2);
    }
    return pr;
}

// Per-pixel contribution record for the backward pass.
struct PixelHit {
    int gaussian;
    double alpha;
};

struct ForwardResult {
    Vec composed;                      // [C_in | C_out], HWC each
    Vec transmittance;                 // per pixel
    std::vector<std::vector<PixelHit>> hits;  // per pixel, front-to-back order
};

ForwardResult composite_forward(const std::vector<Projection>& proj,
                                const std::vector<double>& opacity,
                                const double* colors, const double* gains,
                                const double* offsets, const Camera& cam,
                                const std::array<double, 3>& bg, bool keep_hits) {
    std::size_t n = proj.size();
    std::vector<int> order;
    order.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (proj[i].visible) order.push_back(static_cast<int>(i));
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (proj[a].depth != proj[b].depth) return proj[a].depth < proj[b].depth;
        return a < b;  // stable tie-break by original index
    });

    std::size_t npix = cam.width * cam.height;
    ForwardResult res;
    res.composed.assign(2 * npix * 3, 0.0);
    res.transmittance.assign(npix, 1.0);
    if (keep_hits) res.hits.resize(npix);

    // Bucket visible Gaussians by row span to avoid an all-pixels x all-splats
    // scan; per pixel we still walk candidates in global depth order.
    std::vector<std::vector<int>> row_lists(cam.height);
    for (int gi : order) {
        const Projection& p = proj[gi];
        for (int y = p.y0; y <= p.y1; ++y) row_lists[y].push_back(gi);
    }

    for (std::size_t y = 0; y < cam.height; ++y) {
        for (std::size_t x = 0; x < cam.width; ++x) {
            std::size_t pix = y * cam.width + x;
            double cx = static_cast<double>(x) + 0.5;
            double cy = static_cast<double>(y) + 0.5;
            double trans = 1.0;
            double acc_in[3] = {0, 0, 0};
            double acc_out[3] = {0, 0, 0};
            for (int gi : row_lists[y]) {
                const Projection& p = proj[gi];
                if (static_cast<int>(x) < p.x0 || static_cast<int>(x) > p.x1) continue;
                double dx = cx - p.mean_x;
                double dy = cy - p.mean_y;
                double q = p.inv_a * dx * dx + 2.0 * p.inv_b * dx * dy + p.inv_c * dy * dy;
                double alpha = opacity[gi] * std::exp(-0.5 * q);
                if (alpha <= kAlphaCutoff) continue;
                double w = alpha * trans;
                const double* c = colors + 3 * gi;
                const double* a = gains + 3 * gi;
                const double* b = offsets + 3 * gi;
                for (int ch = 0; ch < 3; ++ch) {
                    acc_in[ch] += w * c[ch];
                    acc_out[ch] += w * (a[ch] * c[ch] + b[ch]);
                }
                if (keep_hits) res.hits[pix].push_back({gi, alpha});
                trans *= (1.0 - alpha);
                if (trans < kEarlyExitT) break;
            }
            for (int ch = 0; ch < 3; ++ch) {
                acc_in[ch] += bg[ch] * trans;
                acc_out[ch] += bg[ch] * trans;
            }
            res.transmittance[pix] = trans;
            std::size_t base = pix * 3;
            for (int ch = 0; ch < 3; ++ch) {
                res.composed[base + ch] = acc_in[ch];
                res.composed[npix * 3 + base + ch] = acc_out[ch];
            }
        }
    }
    return res;
}

struct GeomGrad {
    double mean[2] = {0, 0};
    double inv[3] = {0, 0, 0};  // d/d inv_a, "2b" channel, inv_c
};

}  // namespace

void validate_camera(const Camera& cam) {
    if (cam.fx <= 0 || cam.fy <= 0) throw DataError("camera: fx and fy must be positive");
    if (cam.width < 1 || cam.height < 1) throw DataError("camera: empty image plane");
    const auto& m = cam.world_to_camera;
    double r[3][3] = {{m[0], m[1], m[2]}, {m[4], m[5], m[6]}, {m[8], m[9], m[10]}};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = r[i][0] * r[j][0] + r[i][1] * r[j][1] + r[i][2] * r[j][2];
            double expect = i == j ? 1.0 : 0.0;
            if (std::abs(dot - expect) > 1e-6) {
                throw DataError("camera: extrinsic rotation block not orthonormal");
            }
        }
    }
}

Projection project(const Gaussian& g, const Camera& cam) {
    return project_impl(g.mu.data(), g.log_scales.data(), g.quat.data(),
                        sigmoid(g.opacity_logit), cam, nullptr);
}

RenderedPair render_dual(const GaussianCloud& cloud, const Camera& cam,
                         const std::array<double, 3>& background) {
    std::size_t n = cloud.gaussians.size();
    std::vector<Projection> proj(n);
    std::vector<double> opac(n);
    Vec colors(3 * n), gains(3 * n), offsets(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const Gaussian& g = cloud.gaussians[i];
        opac[i] = sigmoid(g.opacity_logit);
        proj[i] = project_impl(g.mu.data(), g.log_scales.data(), g.quat.data(), opac[i], cam,
                               nullptr);
        for (int ch = 0; ch < 3; ++ch) {
            colors[3 * i + ch] = g.color[ch];
            gains[3 * i + ch] = g.gain[ch];
            offsets[3 * i + ch] = g.offset[ch];
        }
    }
    ForwardResult fr = composite_forward(proj, opac, colors.data(), gains.data(),
                                         offsets.data(), cam, background, false);
    RenderedPair out;
    out.input_render = Image(cam.width, cam.height);
    out.adjusted_render = Image(cam.width, cam.height);
    std::size_t npix = cam.width * cam.height;
    std::copy(fr.composed.begin(), fr.composed.begin() + npix * 3,
              out.input_render.data.begin());
    std::copy(fr.composed.begin() + npix * 3, fr.composed.end(),
              out.adjusted_render.data.begin());
    out.transmittance = std::move(fr.transmittance);
    return out;
}

Image render_adjusted(const GaussianCloud& cloud, const Camera& cam,
                      const std::array<double, 3>& background) {
    return render_dual(cloud, cam, background).adjusted_render;
}

Image render_base(const GaussianCloud& cloud, const Camera& cam,
                  const std::array<double, 3>& background) {
    return render_dual(cloud, cam, background).input_render;
}

Var render_dual_node(Tape& t, const GaussianCloud& cloud, const Camera& cam,
                     const RenderVars& vars, const std::array<double, 3>& background,
                     std::vector<double>* transmittance_out) {
    std::size_t n = cloud.gaussians.size();
    if (t.size(vars.colors) != 3 * n || t.size(vars.gains) != 3 * n ||
        t.size(vars.offsets) != 3 * n || t.size(vars.logits) != n) {
        throw UsageError("render_dual_node: parameter sizes do not match cloud");
    }
    bool geom = vars.geometry();
    if (geom && (t.size(vars.mu) != 3 * n || t.size(vars.log_scales) != 3 * n ||
                 t.size(vars.quats) != 4 * n)) {
        throw UsageError("render_dual_node: geometry parameter sizes do not match cloud");
    }

    const Vec& colors = t.val(vars.colors);
    const Vec& gains = t.val(vars.gains);
    const Vec& offsets = t.val(vars.offsets);
    const Vec& logits = t.val(vars.logits);

    auto mu_at = [&](std::size_t i) {
        return geom ? &t.val(vars.mu)[3 * i] : cloud.gaussians[i].mu.data();
    };
    auto ls_at = [&](std::size_t i) {
        return geom ? &t.val(vars.log_scales)[3 * i] : cloud.gaussians[i].log_scales.data();
    };
    auto quat_at = [&](std::size_t i) {
        return geom ? &t.val(vars.quats)[4 * i] : cloud.gaussians[i].quat.data();
    };

    auto proj = std::make_shared<std::vector<Projection>>(n);
    auto opac = std::make_shared<std::vector<double>>(n);
    for (std::size_t i = 0; i < n; ++i) {
        (*opac)[i] = sigmoid(logits[i]);
        (*proj)[i] = project_impl(mu_at(i), ls_at(i), quat_at(i), (*opac)[i], cam, nullptr);
    }
    ForwardResult fr = composite_forward(*proj, *opac, colors.data(), gains.data(),
                                         offsets.data(), cam, background, true);
    if (transmittance_out) *transmittance_out = fr.transmittance;

    auto hits = std::make_shared<std::vector<std::vector<PixelHit>>>(std::move(fr.hits));
    std::size_t npix = cam.width * cam.height;

    return t.custom(std::move(fr.composed), [=](Tape& tp, const Vec& g) {
        const Vec& colors = tp.val(vars.colors);
        const Vec& gains = tp.val(vars.gains);
        const Vec& offsets = tp.val(vars.offsets);
        Vec& gc = tp.grad_mut(vars.colors);
        Vec& ga = tp.grad_mut(vars.gains);
        Vec& gb = tp.grad_mut(vars.offsets);
        Vec& gl = tp.grad_mut(vars.logits);

        std::vector<GeomGrad> geom_grads;
        if (geom) geom_grads.resize(n);

        std::vector<double> t_prefix;
        for (std::size_t pix = 0; pix < npix; ++pix) {
            const std::vector<PixelHit>& hs = (*hits)[pix];
            if (hs.empty()) continue;
            const double* g_in = &g[pix * 3];
            const double* g_out = &g[npix * 3 + pix * 3];

            t_prefix.assign(hs.size() + 1, 1.0);
            for (std::size_t i = 0; i < hs.size(); ++i) {
                t_prefix[i + 1] = t_prefix[i] * (1.0 - hs[i].alpha);
            }
            double t_end = t_prefix[hs.size()];

            double suffix_in[3], suffix_out[3];
            for (int ch = 0; ch < 3; ++ch) {
                suffix_in[ch] = background[ch] * t_end;
                suffix_out[ch] = background[ch] * t_end;
            }
            for (std::size_t ri = hs.size(); ri-- > 0;) {
                int gi = hs[ri].gaussian;
                double alpha = hs[ri].alpha;
                double ti = t_prefix[ri];
                double w = alpha * ti;
                const double* c = &colors[3 * gi];
                const double* av = &gains[3 * gi];
                const double* bv = &offsets[3 * gi];
                double dalpha = 0.0;
                for (int ch = 0; ch < 3; ++ch) {
                    double cout = av[ch] * c[ch] + bv[ch];
                    gc[3 * gi + ch] += w * (g_in[ch] + g_out[ch] * av[ch]);
                    ga[3 * gi + ch] += w * g_out[ch] * c[ch];
                    gb[3 * gi + ch] += w * g_out[ch];
                    dalpha += g_in[ch] * (c[ch] * ti - suffix_in[ch] / (1.0 - alpha));
                    dalpha += g_out[ch] * (cout * ti - suffix_out[ch] / (1.0 - alpha));
                    suffix_in[ch] += c[ch] * w;
                    suffix_out[ch] += cout * w;
                }
                double o = (*opac)[gi];
                gl[gi] += dalpha * alpha * (1.0 - o);

                if (geom) {
                    const Projection& p = (*proj)[gi];
                    std::size_t x = pix % cam.width;
                    std::size_t y = pix / cam.width;
                    double dx = static_cast<double>(x) + 0.5 - p.mean_x;
                    double dy = static_cast<double>(y) + 0.5 - p.mean_y;
                    double dq = -0.5 * alpha * dalpha;
                    double sx = p.inv_a * dx + p.inv_b * dy;
                    double sy = p.inv_b * dx + p.inv_c * dy;
                    GeomGrad& gg = geom_grads[gi];
                    // q = d^T Inv d with d = center - mean, so dq/dmean = -2 Inv d
                    gg.mean[0] += dq * (-2.0) * sx;
                    gg.mean[1] += dq * (-2.0) * sy;
                    gg.inv[0] += dq * dx * dx;
                    gg.inv[1] += dq * 2.0 * dx * dy;
                    gg.inv[2] += dq * dy * dy;
                }
            }
        }

        if (!geom) return;
        Vec& gmu = tp.grad_mut(vars.mu);
        Vec& gls = tp.grad_mut(vars.log_scales);
        Vec& gq = tp.grad_mut(vars.quats);
        for (std::size_t i = 0; i < n; ++i) {
            const Projection& p = (*proj)[i];
            if (!p.visible) continue;
            const GeomGrad& gg = geom_grads[i];

            ProjScratch sc;
            const Vec& vmu = tp.val(vars.mu);
            const Vec& vls = tp.val(vars.log_scales);
            const Vec& vq = tp.val(vars.quats);
            project_impl(&vmu[3 * i], &vls[3 * i], &vq[4 * i], (*opac)[i], cam, &sc);

            // dSigma = -Inv * GInv * Inv, with GInv the symmetric gradient
            // wrt the inverse covariance.
            double ginv[2][2] = {{gg.inv[0], gg.inv[1] * 0.5}, {gg.inv[1] * 0.5, gg.inv[2]}};
            double inv[2][2] = {{p.inv_a, p.inv_b}, {p.inv_b, p.inv_c}};
            double tmp[2][2], dsig[2][2];
            for (int r = 0; r < 2; ++r) {
                for (int cidx = 0; cidx < 2; ++cidx) {
                    tmp[r][cidx] = inv[r][0] * ginv[0][cidx] + inv[r][1] * ginv[1][cidx];
                }
            }
            for (int r = 0; r < 2; ++r) {
                for (int cidx = 0; cidx < 2; ++cidx) {
                    dsig[r][cidx] = -(tmp[r][0] * inv[0][cidx] + tmp[r][1] * inv[1][cidx]);
                }
            }

            // dSigma3 = M^T dSigma M; dM = 2 dSigma M Sigma3.
            double dsig3[3][3];
            for (int r = 0; r < 3; ++r) {
                for (int cidx = 0; cidx < 3; ++cidx) {
                    double acc = 0.0;
                    for (int u = 0; u < 2; ++u) {
                        for (int v = 0; v < 2; ++v) {
                            acc += sc.jw.m[u][r] * dsig[u][v] * sc.jw.m[v][cidx];
                        }
                    }
                    dsig3[r][cidx] = acc;
                }
            }
            double msig[2][3];
            for (int u = 0; u < 2; ++u) {
                for (int cidx = 0; cidx < 3; ++cidx) {
                    msig[u][cidx] = sc.jw.m[u][0] * sc.sigma3[0][cidx] +
                                    sc.jw.m[u][1] * sc.sigma3[1][cidx] +
                                    sc.jw.m[u][2] * sc.sigma3[2][cidx];
                }
            }
            double dm[2][3];
            for (int u = 0; u < 2; ++u) {
                for (int cidx = 0; cidx < 3; ++cidx) {
                    dm[u][cidx] = 2.0 * (dsig[u][0] * msig[0][cidx] + dsig[u][1] * msig[1][cidx]);
                }
            }

            // M = J W: dJ = dM W^T; J and the projected mean both depend on
            // the camera-space position.
            double dj[2][3];
            for (int u = 0; u < 2; ++u) {
                for (int cidx = 0; cidx < 3; ++cidx) {
                    dj[u][cidx] = dm[u][0] * sc.w_rot[cidx][0] + dm[u][1] * sc.w_rot[cidx][1] +
                                  dm[u][2] * sc.w_rot[cidx][2];
                }
            }
            double xc = sc.p_cam[0], yc = sc.p_cam[1], zc = sc.p_cam[2];
            double z2 = zc * zc, z3 = z2 * zc;
            double dp[3] = {0, 0, 0};
            dp[0] += dj[0][2] * (-cam.fx / z2);
            dp[1] += dj[1][2] * (-cam.fy / z2);
            dp[2] += dj[0][0] * (-cam.fx / z2) + dj[0][2] * (2.0 * cam.fx * xc / z3) +
                     dj[1][1] * (-cam.fy / z2) + dj[1][2] * (2.0 * cam.fy * yc / z3);
            dp[0] += gg.mean[0] * cam.fx / zc;
            dp[1] += gg.mean[1] * cam.fy / zc;
            dp[2] += gg.mean[0] * (-cam.fx * xc / z2) + gg.mean[1] * (-cam.fy * yc / z2);
            for (int cidx = 0; cidx < 3; ++cidx) {
                gmu[3 * i + cidx] += sc.w_rot[0][cidx] * dp[0] + sc.w_rot[1][cidx] * dp[1] +
                                     sc.w_rot[2][cidx] * dp[2];
            }

            // Sigma3 = R S2 R^T: dR = 2 dSigma3 R S2; dS2 = diag(R^T dSigma3 R).
            double dr[3][3];
            for (int r = 0; r < 3; ++r) {
                for (int cidx = 0; cidx < 3; ++cidx) {
                    double acc = 0.0;
                    for (int u = 0; u < 3; ++u) acc += dsig3[r][u] * sc.rot[u][cidx];
                    dr[r][cidx] = 2.0 * acc * sc.s2[cidx];
                }
            }
            for (int cidx = 0; cidx < 3; ++cidx) {
                double acc = 0.0;
                for (int r = 0; r < 3; ++r) {
                    for (int u = 0; u < 3; ++u) {
                        acc += sc.rot[r][cidx] * dsig3[r][u] * sc.rot[u][cidx];
                    }
                }
                gls[3 * i + cidx] += acc * 2.0 * sc.s2[cidx];
            }

            // Quaternion partials of R (unit quaternion), then chain through
            // the normalization.
            const Vec& vq2 = tp.val(vars.quats);
            const double* qraw = &vq2[4 * i];
            double qn = std::sqrt(qraw[0] * qraw[0] + qraw[1] * qraw[1] + qraw[2] * qraw[2] +
                                  qraw[3] * qraw[3]);
            double w = qraw[0] / qn, x = qraw[1] / qn, y = qraw[2] / qn, z = qraw[3] / qn;
            double dRdq[4][3][3] = {
                {{0, -z, y}, {z, 0, -x}, {-y, x, 0}},
                {{0, y, z}, {y, -2 * x, -w}, {z, w, -2 * x}},
                {{-2 * y, x, w}, {x, 0, z}, {-w, z, -2 * y}},
                {{-2 * z, -w, x}, {w, -2 * z, y}, {x, y, 0}},
            };
            double dqhat[4] = {0, 0, 0, 0};
            for (int k = 0; k < 4; ++k) {
                double acc = 0.0;
                for (int r = 0; r < 3; ++r) {
                    for (int cidx = 0; cidx < 3; ++cidx) {
                        acc += dr[r][cidx] * 2.0 * dRdq[k][r][cidx];
                    }
                }
                dqhat[k] = acc;
            }
            double qhat[4] = {w, x, y, z};
            double dot = dqhat[0] * qhat[0] + dqhat[1] * qhat[1] + dqhat[2] * qhat[2] +
                         dqhat[3] * qhat[3];
            for (int k = 0; k < 4; ++k) {
                gq[4 * i + k] += (dqhat[k] - qhat[k] * dot) / qn;
            }
        }
    });
}

}  // namespace splatcurve
