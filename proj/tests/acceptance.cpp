/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>

#include "splatcurve/colorxform.hpp"
#include "splatcurve/degrade.hpp"
#include "splatcurve/gradsuite.hpp"
#include "splatcurve/losses.hpp"
#include "splatcurve/metrics.hpp"
#include "splatcurve/residual.hpp"
#include "splatcurve/trainer.hpp"

using namespace splatcurve;

namespace {

// Experiment scales for the desk-scale training comparisons.
constexpr int kRecoveryIters = 4000;     // criterion 6; past the omega switch
constexpr int kColorIters = 900;         // criteria 7 and 8
constexpr std::size_t kColorSize = 48;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
    std::printf("criterion %d (%s): %s%s%s\n", idx, name, pass ? "PASS" : "FAIL",
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

double uni(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Camera ring_camera(std::size_t size, double theta, int view_id) {
    double r = 2.6;
    double px = r * std::sin(theta);
    double py = 0.5 + 0.25 * std::sin(3.0 * theta);
    double pz = r * std::cos(theta);
    double f[3] = {-px, -py, -pz};
    double fn = std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
    for (double& v : f) v /= fn;
    double up[3] = {0, 1, 0};
    double x[3] = {up[1] * f[2] - up[2] * f[1], up[2] * f[0] - up[0] * f[2],
                   up[0] * f[1] - up[1] * f[0]};
    double xn = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    for (double& v : x) v /= xn;
    double y[3] = {f[1] * x[2] - f[2] * x[1], f[2] * x[0] - f[0] * x[2],
                   f[0] * x[1] - f[1] * x[0]};
    Camera cam;
    cam.fx = cam.fy = static_cast<double>(size);
    cam.cx = cam.cy = static_cast<double>(size) / 2.0;
    cam.width = cam.height = size;
    double p[3] = {px, py, pz};
    double rows[3][3] = {{x[0], x[1], x[2]}, {y[0], y[1], y[2]}, {f[0], f[1], f[2]}};
    for (int ri = 0; ri < 3; ++ri) {
        double tr = 0.0;
        for (int c = 0; c < 3; ++c) {
            cam.world_to_camera[4 * ri + c] = rows[ri][c];
            tr += rows[ri][c] * p[c];
        }
        cam.world_to_camera[4 * ri + 3] = -tr;
    }
    cam.world_to_camera[15] = 1.0;
    cam.view_id = view_id;
    validate_camera(cam);
    return cam;
}

Scene synth_scene(std::size_t n_gauss, std::size_t n_views, std::size_t size,
                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Scene scene;
    for (std::size_t i = 0; i < n_gauss; ++i) {
        Gaussian g;
        for (int c = 0; c < 3; ++c) {
            g.mu[c] = 1.6 * (uni(rng) - 0.5);
            // Wide, mostly opaque splats so the frame is covered like a real
            // capture; a black void background skews the histogram priors.
            g.log_scales[c] = std::log(0.20 + 0.35 * uni(rng));
            g.color[c] = 0.15 + 0.75 * uni(rng);
        }
        double q[4] = {1.0 + uni(rng), uni(rng) - 0.5, uni(rng) - 0.5, uni(rng) - 0.5};
        double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        for (int c = 0; c < 4; ++c) g.quat[c] = q[c] / qn;
        g.opacity_logit = 0.5 + 2.0 * uni(rng);
        scene.cloud.gaussians.push_back(g);
    }
    for (std::size_t k = 0; k < n_views; ++k) {
        scene.cameras.push_back(ring_camera(
            size, 2.0 * 3.14159265358979323846 * static_cast<double>(k) /
                      static_cast<double>(n_views),
            static_cast<int>(k)));
    }
    return scene;
}

std::vector<Image> clean_renders(const Scene& scene) {
    std::vector<Image> out;
    for (const Camera& cam : scene.cameras) {
        Image img = render_base(scene.cloud, cam);
        for (double& v : img.data) v = std::min(1.0, std::max(0.0, v));
        out.push_back(std::move(img));
    }
    return out;
}

struct SplitScene {
    Scene train;                 // first n_train cameras
    std::vector<Camera> held;    // remainder
    std::vector<Image> clean_train, clean_held;
};

SplitScene split(const Scene& scene, std::size_t n_train) {
    SplitScene s;
    s.train.cloud = scene.cloud;
    std::vector<Image> clean = clean_renders(scene);
    for (std::size_t k = 0; k < scene.cameras.size(); ++k) {
        if (k < n_train) {
            s.train.cameras.push_back(scene.cameras[k]);
            s.clean_train.push_back(clean[k]);
        } else {
            s.held.push_back(scene.cameras[k]);
            s.clean_held.push_back(clean[k]);
        }
    }
    return s;
}

double held_out_psnr(const Trainer& tr, const SplitScene& s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.held.size(); ++k) {
        acc += psnr(tr.render_view(s.held[k]), s.clean_held[k]);
    }
    return acc / static_cast<double>(s.held.size());
}

std::vector<Image> held_out_renders(const Trainer& tr, const SplitScene& s) {
    std::vector<Image> out;
    for (const Camera& cam : s.held) out.push_back(tr.render_view(cam));
    return out;
}

double channel_imbalance(const std::vector<Image>& imgs) {
    double sums[3] = {0, 0, 0};
    std::size_t count = 0;
    for (const Image& img : imgs) {
        for (std::size_t p = 0; p < img.pixel_count(); ++p) {
            for (int c = 0; c < 3; ++c) sums[c] += img.data[3 * p + c];
        }
        count += img.pixel_count();
    }
    double mx = 0.0, mn = 1e300;
    for (double s : sums) {
        double m = s / static_cast<double>(count);
        mx = std::max(mx, m);
        mn = std::min(mn, m);
    }
    return mx / std::max(mn, 1e-12);
}

// ---- criteria ----

void criterion_1() {
    Timer timer;
    std::vector<GradReport> reports = run_gradient_suite();
    double secs = timer.seconds();
    bool all = true;
    std::string worst;
    double worst_err = -1.0;
    for (const GradReport& r : reports) {
        all = all && r.pass;
        if (r.max_rel_err > worst_err) {
            worst_err = r.max_rel_err;
            worst = r.op_name;
        }
        if (!r.pass) worst = r.op_name + " FAILED";
    }
    bool pass = all && secs < 120.0;
    report(1, "gradient suite", pass,
           fmt("%zu ops, worst %s rel err %.2e, %.1f s", reports.size(), worst.c_str(),
               worst_err, secs));
}

void criterion_2() {
    std::mt19937_64 rng(0x5eed);
    Image img(12, 12);
    for (double& v : img.data) v = uni(rng);

    ResidualWeights rw = ResidualWeights::init(0.1, 1);
    Tape t;
    ParamSet ps(t);
    ResidualVars rv = bind_residual(ps, rw);
    Var m = t.leaf(Vec{1, 0, 0, 0, 1, 0, 0, 0, 1});
    Var lut = t.leaf(ToneCurve::identity().to_vec());
    Var label = pseudo_enhance_node(t, t.leaf(img.data), 12, 12, m, lut, rv, 0.1);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(t.val(label)[i] - img.data[i]));
    }

    Scene scene = synth_scene(8, 1, 16, 2);
    for (auto& g : scene.cloud.gaussians) {
        g.gain = {1, 1, 1};
        g.offset = {0, 0, 0};
    }
    RenderedPair pair = render_dual(scene.cloud, scene.cameras[0]);
    bool bitwise = pair.input_render.data == pair.adjusted_render.data;

    report(2, "identity round-trip", max_diff < 1e-6 && bitwise,
           fmt("pseudo-enhance max diff %.2e, dual pair bitwise-equal: %s", max_diff,
               bitwise ? "yes" : "no"));
}

void criterion_3() {
    // Brute-force per-pixel oracle: every Gaussian, no culling, no early exit.
    Camera cam;
    cam.fx = cam.fy = 16.0;
    cam.cx = cam.cy = 8.0;
    cam.width = cam.height = 16;
    cam.world_to_camera = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 2.5, 0, 0, 0, 1};
    cam.view_id = 0;

    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        std::mt19937_64 rng(seed);
        GaussianCloud cloud;
        for (int i = 0; i < 8; ++i) {
            Gaussian g;
            for (int c = 0; c < 3; ++c) {
                g.mu[c] = 1.2 * (uni(rng) - 0.5);
                g.log_scales[c] = -1.6 + 0.6 * uni(rng);
                g.color[c] = 0.15 + 0.7 * uni(rng);
                g.gain[c] = 0.7 + 0.6 * uni(rng);
                g.offset[c] = 0.2 * (uni(rng) - 0.5);
            }
            double q[4] = {0.5 + uni(rng), uni(rng) - 0.5, uni(rng) - 0.5,
                           uni(rng) - 0.5};
            double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
            for (int c = 0; c < 4; ++c) g.quat[c] = q[c] / qn;
            g.opacity_logit = -0.5 + uni(rng);
            cloud.gaussians.push_back(g);
        }

        RenderedPair got = render_dual(cloud, cam);

        std::vector<Projection> proj;
        std::vector<int> order;
        for (std::size_t i = 0; i < cloud.gaussians.size(); ++i) {
            proj.push_back(project(cloud.gaussians[i], cam));
            order.push_back(static_cast<int>(i));
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return proj[a].depth < proj[b].depth; });
        for (std::size_t y = 0; y < cam.height; ++y) {
            for (std::size_t x = 0; x < cam.width; ++x) {
                double trans = 1.0;
                double in[3] = {0, 0, 0}, ad[3] = {0, 0, 0};
                for (int gi : order) {
                    const Projection& p = proj[gi];
                    const Gaussian& g = cloud.gaussians[gi];
                    double o = 1.0 / (1.0 + std::exp(-g.opacity_logit));
                    double dx = x + 0.5 - p.mean_x;
                    double dy = y + 0.5 - p.mean_y;
                    double q = p.inv_a * dx * dx + 2 * p.inv_b * dx * dy +
                               p.inv_c * dy * dy;
                    double alpha = o * std::exp(-0.5 * q);
                    for (int c = 0; c < 3; ++c) {
                        in[c] += alpha * trans * g.color[c];
                        ad[c] += alpha * trans * (g.gain[c] * g.color[c] + g.offset[c]);
                    }
                    trans *= 1.0 - alpha;
                }
                for (int c = 0; c < 3; ++c) {
                    worst = std::max(worst, std::abs(got.input_render.at(x, y, c) - in[c]));
                    worst = std::max(worst,
                                     std::abs(got.adjusted_render.at(x, y, c) - ad[c]));
                }
            }
        }
    }
    report(3, "compositing oracle", worst < 1e-6, fmt("max abs diff %.2e", worst));
}

void criterion_4() {
    bool pass = true;
    std::string detail;

    // loss_spa of a globally-scaled pair
    std::mt19937_64 rng(7);
    Image input(16, 16);
    for (double& v : input.data) v = 0.2 + 0.6 * uni(rng);
    double mean_in = 0.0;
    for (double v : input.data) mean_in += v;
    mean_in /= static_cast<double>(input.data.size());
    Image scaled = input;
    for (double& v : scaled.data) v *= 0.5 / mean_in;
    Tape t;
    double spa = t.scalar(loss_spa_node(t, t.leaf(scaled.data), input, 16, 16));
    pass = pass && std::abs(spa) < 1e-10;

    // loss_cc of a neutral image
    Image neutral(8, 8);
    for (std::size_t p = 0; p < neutral.pixel_count(); ++p) {
        double v = uni(rng);
        for (int c = 0; c < 3; ++c) neutral.data[3 * p + c] = v;
    }
    double cc = t.scalar(
        loss_cc_view_node(t, t.leaf(neutral.data), t.leaf_scalar(3.0), 8, 8));
    pass = pass && std::abs(cc) < 1e-10;

    // loss_tv of the identity ramp
    double tv = t.scalar(loss_tv_node(t, t.leaf(ToneCurve::identity().to_vec())));
    pass = pass && std::abs(tv - 1.0 / 65025.0) <= 1e-12;

    // loss_curve when L equals both targets
    Var po = power_curve_node(t, t.leaf_scalar(1.0));
    Var sc = s_curve_node(t, t.leaf_scalar(0.5), t.leaf_scalar(1.0));
    Var prior = mul(t, po, sc);
    double curve = t.scalar(loss_curve_node(t, prior, t.val(prior), po, sc, 1.0));
    pass = pass && std::abs(curve) < 1e-15;

    report(4, "loss zero-cases", pass,
           fmt("spa %.1e, cc %.1e, tv-ramp err %.1e, curve %.1e", spa, cc,
               tv - 1.0 / 65025.0, curve));
}

void criterion_5() {
    // Fixed L_cdf: histogram CDF of an image whose values are sqrt(uniform),
    // i.e. a CDF close to x^2, within reach of the prior-anchored fixed point.
    Image img(64, 64);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        double u = (static_cast<double>(i) + 0.5) / static_cast<double>(img.pixel_count());
        double v = std::sqrt(u);
        for (int c = 0; c < 3; ++c) img.data[3 * i + c] = v;
    }
    Vec cdf = cdf_curve(img).to_vec();

    Parameter curve("L", ToneCurve::identity().to_vec());
    Vec m(256, 0.0), v2(256, 0.0);
    const double lr = 5e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    int steps = 0;
    double max_err = 1e300;
    for (steps = 1; steps <= 1000; ++steps) {
        Tape t;
        ParamSet ps(t);
        curve.zero_grad();
        Var cv = ps.bind(curve);
        Var po = power_curve_node(t, t.leaf_scalar(1.0));
        Var sc = s_curve_node(t, t.leaf_scalar(0.5), t.leaf_scalar(1.0));
        Var loss = mul_const(t, loss_curve_node(t, cv, cdf, po, sc, 1.0), 10.0);
        ps.backward(loss);
        double bc1 = 1.0 - std::pow(b1, steps);
        double bc2 = 1.0 - std::pow(b2, steps);
        for (int i = 0; i < 256; ++i) {
            m[i] = b1 * m[i] + (1 - b1) * curve.grad[i];
            v2[i] = b2 * v2[i] + (1 - b2) * curve.grad[i] * curve.grad[i];
            curve.value[i] -= lr * (m[i] / bc1) / (std::sqrt(v2[i] / bc2) + eps);
        }
        max_err = 0.0;
        for (int i = 0; i < 256; ++i) {
            max_err = std::max(max_err, std::abs(curve.value[i] - cdf[i]));
        }
        if (max_err < 0.02) break;
    }
    report(5, "curve-prior convergence", max_err < 0.02,
           fmt("max|L - L_cdf| = %.4f after %d steps", max_err, steps));
}

void criterion_6() {
    Timer timer;
    double full_sum = 0.0, base_sum = 0.0;
    double worst_run = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Scene scene = synth_scene(30, 10, 64, 100 + seed);
        SplitScene s = split(scene, 8);
        std::vector<DegradationParams> dp =
            sample_scene_params(DegradationProfile::kVarying, seed, 8);
        std::vector<Image> degraded;
        for (std::size_t k = 0; k < 8; ++k) {
            degraded.push_back(apply_degradation(s.clean_train[k], dp[k]));
        }

        Timer run_timer;
        TrainConfig cfg;
        cfg.iterations = kRecoveryIters;
        cfg.seed = seed;
        cfg.scenario = "lightness";
        Trainer full(s.train, degraded, cfg);
        full.run();
        full_sum += held_out_psnr(full, s);
        worst_run = std::max(worst_run, run_timer.seconds());

        Timer base_timer;
        TrainConfig bcfg = cfg;
        bcfg.baseline = true;
        Trainer base(s.train, degraded, bcfg);
        base.run();
        base_sum += held_out_psnr(base, s);
        worst_run = std::max(worst_run, base_timer.seconds());
        std::fprintf(stderr, "criterion 6 seed %llu: full %.2f dB, baseline %.2f dB, %.0f s\n",
                     static_cast<unsigned long long>(seed),
                     held_out_psnr(full, s), held_out_psnr(base, s), run_timer.seconds());
    }
    double full_mean = full_sum / 3.0, base_mean = base_sum / 3.0;
    double gain = full_mean - base_mean;
    report(6, "desk-scale lightness recovery", gain >= 3.0 && worst_run < 600.0,
           fmt("held-out PSNR %.2f dB vs baseline %.2f dB (gain %.2f dB), "
               "slowest run %.0f s, %.0f s total",
               full_mean, base_mean, gain, worst_run, timer.seconds()));
}

void criterion_7() {
    Timer timer;
    double gap_cc = 0.0, gap_nocc = 0.0;
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
        Scene scene = synth_scene(30, 8, kColorSize, 200 + seed);
        SplitScene s = split(scene, 6);
        std::vector<Image> degraded;
        for (const Image& c : s.clean_train) {
            degraded.push_back(apply_color_degradation(c, 2000.0, 1.0, 1.0));
        }

        TrainConfig cfg;
        cfg.iterations = kColorIters;
        cfg.seed = seed;
        cfg.scenario = "color";  // eta 0.1
        Trainer with_cc(s.train, degraded, cfg);
        with_cc.run();
        gap_cc += channel_imbalance(held_out_renders(with_cc, s)) - 1.0;

        TrainConfig cfg0 = cfg;
        cfg0.eta_override = 0.0;
        Trainer without_cc(s.train, degraded, cfg0);
        without_cc.run();
        gap_nocc += channel_imbalance(held_out_renders(without_cc, s)) - 1.0;
    }
    bool pass = gap_cc <= 0.5 * gap_nocc;
    report(7, "color-correction effect", pass,
           fmt("imbalance gap %.4f with L_cc vs %.4f without (need <= 50%%), %.0f s",
               gap_cc / 2.0, gap_nocc / 2.0, timer.seconds()));
}

void criterion_8() {
    Timer timer;
    double full_sum = 0.0, base_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Scene scene = synth_scene(30, 8, kColorSize, 300 + seed);
        SplitScene s = split(scene, 6);
        std::vector<DegradationParams> dp =
            sample_scene_params(DegradationProfile::kMixedTemp, seed, 6);
        std::vector<Image> degraded;
        for (std::size_t k = 0; k < 6; ++k) {
            degraded.push_back(apply_degradation(s.clean_train[k], dp[k]));
        }

        TrainConfig cfg;
        cfg.iterations = kColorIters;
        cfg.seed = seed;
        cfg.scenario = "color";
        Trainer full(s.train, degraded, cfg);
        full.run();
        full_sum += chroma_dispersion(held_out_renders(full, s)).pooled;

        TrainConfig bcfg = cfg;
        bcfg.baseline = true;
        Trainer base(s.train, degraded, bcfg);
        base.run();
        base_sum += chroma_dispersion(held_out_renders(base, s)).pooled;
    }
    report(8, "chromaticity consistency", full_sum < base_sum,
           fmt("pooled a*b* std %.3f (full) vs %.3f (baseline), %.0f s", full_sum / 3.0,
               base_sum / 3.0, timer.seconds()));
}

void criterion_9() {
    namespace fs = std::filesystem;
    Scene scene = synth_scene(6, 2, 16, 9);
    std::vector<Image> inputs = clean_renders(scene);
    Scene train_scene = scene;

    TrainConfig cfg;
    cfg.iterations = 16;
    cfg.seed = 42;

    Trainer a(train_scene, inputs, cfg);
    Trainer b(train_scene, inputs, cfg);
    a.run();
    b.run();
    bool same_logs = a.loss_log().size() == b.loss_log().size();
    for (std::size_t i = 0; same_logs && i < a.loss_log().size(); ++i) {
        same_logs = a.loss_log()[i].total == b.loss_log()[i].total;
    }

    fs::path ckpt = fs::temp_directory_path() / "sc_accept_ckpt.json";
    Trainer c(train_scene, inputs, cfg);
    for (int i = 0; i < 9; ++i) c.step();
    c.save_checkpoint(ckpt.string());
    for (int i = 0; i < 7; ++i) c.step();
    auto d = Trainer::load_checkpoint(ckpt.string(), train_scene, inputs);
    for (int i = 0; i < 7; ++i) d->step();
    bool resume_ok = c.loss_log().size() == d->loss_log().size();
    for (std::size_t i = 0; resume_ok && i < c.loss_log().size(); ++i) {
        resume_ok = c.loss_log()[i].total == d->loss_log()[i].total;
    }
    GaussianCloud cc = c.current_cloud();
    GaussianCloud dc = d->current_cloud();
    for (std::size_t i = 0; resume_ok && i < cc.gaussians.size(); ++i) {
        resume_ok = cc.gaussians[i].color == dc.gaussians[i].color &&
                    cc.gaussians[i].gain == dc.gaussians[i].gain &&
                    cc.gaussians[i].opacity_logit == dc.gaussians[i].opacity_logit;
    }
    fs::remove(ckpt);

    report(9, "determinism and checkpointing", same_logs && resume_ok,
           fmt("same-seed logs identical: %s, bitwise resume: %s",
               same_logs ? "yes" : "no", resume_ok ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
    // With no arguments every criterion runs; arguments select a subset,
    // e.g. "acceptance 6 7".
    auto wanted = [&](int idx) {
        if (argc < 2) return true;
        for (int i = 1; i < argc; ++i) {
            if (std::atoi(argv[i]) == idx) return true;
        }
        return false;
    };
    if (wanted(1)) criterion_1();
    if (wanted(2)) criterion_2();
    if (wanted(3)) criterion_3();
    if (wanted(4)) criterion_4();
    if (wanted(5)) criterion_5();
    if (wanted(6)) criterion_6();
    if (wanted(7)) criterion_7();
    if (wanted(8)) criterion_8();
    if (wanted(9)) criterion_9();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
