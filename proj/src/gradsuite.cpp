/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/gradsuite.hpp"

#include <cmath>
#include <random>

#include "splatcurve/colorxform.hpp"
#include "splatcurve/generators.hpp"
#include "splatcurve/losses.hpp"
#include "splatcurve/renderer.hpp"
#include "splatcurve/residual.hpp"

namespace splatcurve {

namespace {

constexpr double kTol = 1e-4;
constexpr double kStep = 1e-5;

// Pixel values at LUT-segment midpoints so finite-difference probes never
// cross an interpolation knot or a clamp boundary.
Vec midpoints(std::size_t n, std::uint64_t seed, int lo = 10, int hi = 245) {
    std::mt19937_64 rng(seed);
    Vec v(n);
    for (double& x : v) {
        x = (static_cast<double>(lo + rng() % (hi - lo)) + 0.5) / 255.0;
    }
    return v;
}

Vec noisy(std::size_t n, double base, double amp, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Vec v(n);
    for (double& x : v) {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x = base + amp * (2.0 * u - 1.0);
    }
    return v;
}

Vec ramp_plus(double amp, std::uint64_t seed) {
    Vec v = ToneCurve::identity().to_vec();
    Vec n = noisy(256, 0.0, amp, seed);
    for (std::size_t i = 0; i < 256; ++i) v[i] += n[i];
    return v;
}

Image image_from(const Vec& v, std::size_t w, std::size_t h) {
    Image img(w, h);
    img.data = v;
    return img;
}

GaussianCloud small_cloud() {
    GaussianCloud cloud;
    std::mt19937_64 rng(404);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 4; ++i) {
        Gaussian g;
        g.mu = {0.8 * (u() - 0.5), 0.8 * (u() - 0.5), 0.6 * (u() - 0.5)};
        g.log_scales = {std::log(0.25 + 0.1 * u()), std::log(0.25 + 0.1 * u()),
                        std::log(0.25 + 0.1 * u())};
        g.quat = {1.0, 0.3 * (u() - 0.5), 0.3 * (u() - 0.5), 0.3 * (u() - 0.5)};
        g.opacity_logit = -0.5 + 0.8 * u();
        g.color = {0.2 + 0.6 * u(), 0.2 + 0.6 * u(), 0.2 + 0.6 * u()};
        g.gain = {0.9 + 0.2 * u(), 0.9 + 0.2 * u(), 0.9 + 0.2 * u()};
        g.offset = {0.05 * u(), 0.05 * u(), 0.05 * u()};
        cloud.gaussians.push_back(g);
    }
    return cloud;
}

Camera small_camera(std::size_t size = 16) {
    Camera cam;
    cam.fx = cam.fy = static_cast<double>(size);
    cam.cx = cam.cy = static_cast<double>(size) / 2.0;
    cam.width = cam.height = size;
    cam.world_to_camera = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 2.5, 0, 0, 0, 1};
    return cam;
}

RenderVars bind_cloud(ParamSet& ps, Parameter& colors, Parameter& gains,
                      Parameter& offsets, Parameter& logits) {
    RenderVars rv;
    rv.colors = ps.bind(colors);
    rv.gains = ps.bind(gains);
    rv.offsets = ps.bind(offsets);
    rv.logits = ps.bind(logits);
    return rv;
}

void cloud_attribute_params(const GaussianCloud& cloud, Parameter& colors,
                            Parameter& gains, Parameter& offsets, Parameter& logits) {
    std::size_t n = cloud.gaussians.size();
    Vec c(3 * n), a(3 * n), b(3 * n), o(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int ch = 0; ch < 3; ++ch) {
            c[3 * i + ch] = cloud.gaussians[i].color[ch];
            a[3 * i + ch] = cloud.gaussians[i].gain[ch];
            b[3 * i + ch] = cloud.gaussians[i].offset[ch];
        }
        o[i] = cloud.gaussians[i].opacity_logit;
    }
    colors = Parameter("colors", std::move(c));
    gains = Parameter("gains", std::move(a));
    offsets = Parameter("offsets", std::move(b));
    logits = Parameter("logits", std::move(o));
}

void randomize_head(ResidualWeights& w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (double& x : w.head_w.value) {
        x = 0.05 * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
    }
}

}  // namespace

std::vector<GradReport> run_gradient_suite() {
    std::vector<GradReport> reports;

    {
        Parameter img("img", midpoints(48, 11));
        Parameter m("m", noisy(9, 0.0, 0.05, 12));
        for (int i = 0; i < 3; ++i) m.value[4 * i] += 1.0;
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = mean(t, rowwise_mat3(t, ps.bind(img), ps.bind(m)));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("apply_matrix", obj, {&img, &m}, kTol, kStep));
    }
    {
        Parameter m("m", Vec{1.0, 0.01, -0.02, 0.03, 2.0, 0.01, -0.01, 0.02, 4.0});
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = mean(t, inverse3(t, ps.bind(m)));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("invert_matrix", obj, {&m}, kTol, kStep));
    }
    {
        Parameter v("v", midpoints(48, 21));
        Parameter lut("lut", ramp_plus(0.05, 22));
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = mean(t, lut_apply(t, ps.bind(v), ps.bind(lut)));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("apply_curve", obj, {&v, &lut}, kTol, kStep));
    }
    {
        Parameter lg("lg", ramp_plus(0.03, 31));
        Parameter lb("lb", noisy(256, 0.05, 0.03, 32));
        Vec v = midpoints(48, 33);
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var curve = add(t, ps.bind(lg), ps.bind(lb));
            Var loss = mean(t, lut_apply(t, t.leaf(v), curve));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("compose_curve", obj, {&lg, &lb}, kTol, kStep));
    }
    {
        Parameter img("img", midpoints(48, 41, 30, 220));
        Parameter m("m", noisy(9, 0.0, 5e-4, 42));
        for (int i = 0; i < 3; ++i) m.value[4 * i] += 1.0;
        Parameter lut("lut", ramp_plus(0.01, 43));
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = mean(t, global_adjust_node(t, ps.bind(img), ps.bind(m), ps.bind(lut)));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(
            finite_diff_check("global_adjust", obj, {&img, &m, &lut}, kTol, kStep));
    }
    {
        ResidualWeights w = ResidualWeights::init(0.5, 51);
        randomize_head(w, 52);
        Parameter img("img", midpoints(12 * 12 * 3, 53, 30, 220));
        std::vector<Parameter*> params = w.all();
        params.push_back(&img);
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            ResidualVars rv = bind_residual(ps, w);
            Var loss = mean(t, residual_forward(t, rv, ps.bind(img), 12, 12, 0.5));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("residual_map", obj, params, kTol, kStep, 20));
    }
    {
        ResidualWeights w = ResidualWeights::init(0.5, 61);
        randomize_head(w, 62);
        Parameter img("img", midpoints(8 * 8 * 3, 63, 40, 210));
        Parameter m("m", noisy(9, 0.0, 5e-4, 64));
        for (int i = 0; i < 3; ++i) m.value[4 * i] += 1.0;
        Parameter lut("lut", ramp_plus(0.01, 65));
        std::vector<Parameter*> params = w.all();
        params.push_back(&img);
        params.push_back(&m);
        params.push_back(&lut);
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            ResidualVars rv = bind_residual(ps, w);
            Var loss = mean(t, pseudo_enhance_node(t, ps.bind(img), 8, 8, ps.bind(m),
                                                   ps.bind(lut), rv, 0.5));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("pseudo_enhance", obj, params, kTol, kStep, 20));
    }
    {
        Parameter c("c", midpoints(6, 71));
        Parameter a("a", noisy(6, 1.0, 0.2, 72));
        Parameter b("b", noisy(6, 0.0, 0.1, 73));
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = mean(t, add(t, mul(t, ps.bind(a), ps.bind(c)), ps.bind(b)));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("adjusted_color", obj, {&c, &a, &b}, kTol, kStep));
    }
    {
        GaussianCloud cloud = small_cloud();
        Camera cam = small_camera();
        Parameter colors, gains, offsets, logits;
        cloud_attribute_params(cloud, colors, gains, offsets, logits);
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            RenderVars rv = bind_cloud(ps, colors, gains, offsets, logits);
            Var loss = mean(t, render_dual_node(t, cloud, cam, rv));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("render_dual_appearance", obj,
                                            {&colors, &gains, &offsets, &logits}, kTol,
                                            kStep));
    }
    {
        GaussianCloud cloud = small_cloud();
        Camera cam = small_camera();
        Parameter colors, gains, offsets, logits;
        cloud_attribute_params(cloud, colors, gains, offsets, logits);
        std::size_t n = cloud.gaussians.size();
        Vec mu(3 * n), ls(3 * n), q(4 * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < 3; ++c) {
                mu[3 * i + c] = cloud.gaussians[i].mu[c];
                ls[3 * i + c] = cloud.gaussians[i].log_scales[c];
            }
            for (int c = 0; c < 4; ++c) q[4 * i + c] = cloud.gaussians[i].quat[c];
        }
        Parameter pmu("mu", std::move(mu));
        Parameter pls("log_scales", std::move(ls));
        Parameter pq("quats", std::move(q));
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            RenderVars rv = bind_cloud(ps, colors, gains, offsets, logits);
            rv.mu = ps.bind(pmu);
            rv.log_scales = ps.bind(pls);
            rv.quats = ps.bind(pq);
            Var loss = mean(t, render_dual_node(t, cloud, cam, rv));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("render_dual_geometry", obj,
                                            {&pmu, &pls, &pq}, kTol, kStep));
    }
    {
        Parameter pred("pred", midpoints(16 * 16 * 3, 81));
        Vec target = midpoints(16 * 16 * 3, 82);
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = loss_3dgs_node(t, ps.bind(pred), t.leaf(target), 16, 16, 0.2);
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("loss_3dgs", obj, {&pred}, kTol, kStep, 60));
    }
    {
        Parameter pin("pred_in", midpoints(16 * 16 * 3, 83));
        Parameter pout("pred_out", midpoints(16 * 16 * 3, 84));
        Vec tin = midpoints(16 * 16 * 3, 85);
        Vec tout = midpoints(16 * 16 * 3, 86);
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = loss_reg_node(t, ps.bind(pin), t.leaf(tin), ps.bind(pout),
                                     t.leaf(tout), 16, 16, 0.2);
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("loss_reg", obj, {&pin, &pout}, kTol, kStep, 40));
    }
    {
        Parameter pred("pred_out", midpoints(16 * 16 * 3, 91));
        Image input = image_from(midpoints(16 * 16 * 3, 92), 16, 16);
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = loss_spa_node(t, ps.bind(pred), input, 16, 16);
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("loss_spa", obj, {&pred}, kTol, kStep, 60));
    }
    {
        Parameter img("img", midpoints(12 * 12 * 3, 93));
        Parameter s("s_minkowski", Vec{2.3});
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = loss_cc_view_node(t, ps.bind(img), ps.bind(s), 12, 12);
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("loss_cc", obj, {&img, &s}, kTol, kStep, 60));
    }
    {
        Parameter curve("curve", ramp_plus(0.02, 94));
        Parameter g("g_power", Vec{0.8});
        Parameter a("a_pivot", Vec{0.507});
        Parameter b("b_exponent", Vec{1.2});
        Vec cdf(256);
        for (int i = 0; i < 256; ++i) {
            double x = i / 255.0;
            cdf[i] = x * x * (3.0 - 2.0 * x);
        }
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var po = power_curve_node(t, ps.bind(g));
            Var sc = s_curve_node(t, ps.bind(a), ps.bind(b));
            Var loss = loss_curve_node(t, ps.bind(curve), cdf, po, sc, 1.0);
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(
            finite_diff_check("loss_curve", obj, {&curve, &g, &a, &b}, kTol, kStep, 40));
    }
    {
        Parameter curve("curve", ramp_plus(0.05, 95));
        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            Var loss = loss_tv_node(t, ps.bind(curve));
            ps.backward(loss);
            return t.scalar(loss);
        };
        reports.push_back(finite_diff_check("loss_tv", obj, {&curve}, kTol, kStep, 40));
    }
    {
        // Full objective on a small scene, wired exactly as in training.
        GaussianCloud cloud = small_cloud();
        Camera cam = small_camera();
        Image input = image_from(midpoints(16 * 16 * 3, 96, 30, 220), 16, 16);
        Vec cdf = cdf_curve(input).to_vec();
        Parameter colors, gains, offsets, logits;
        cloud_attribute_params(cloud, colors, gains, offsets, logits);
        Parameter lut_g("lut_g", ToneCurve::identity().to_vec());
        Mat3 id_m = identity3();
        Parameter m("m", Vec(id_m.begin(), id_m.end()));
        GeneratorWeights cg = GeneratorWeights::init(256, 97, "curve_gen");
        GeneratorWeights sg = GeneratorWeights::init(4, 98, "scalar_gen");
        ResidualWeights res = ResidualWeights::init(0.5, 99);
        randomize_head(res, 100);

        std::vector<Parameter*> params = {&colors, &gains, &offsets, &logits,
                                          &lut_g,  &m};
        for (Parameter* p : cg.all()) params.push_back(p);
        for (Parameter* p : sg.all()) params.push_back(p);
        for (Parameter* p : res.all()) params.push_back(p);

        auto obj = [&] {
            Tape t;
            ParamSet ps(t);
            RenderVars rv = bind_cloud(ps, colors, gains, offsets, logits);
            Var lut_g_var = ps.bind(lut_g);
            Var m_var = ps.bind(m);
            GeneratorVars cgv = bind_generator(ps, cg);
            GeneratorVars sgv = bind_generator(ps, sg);
            ResidualVars resv = bind_residual(ps, res);

            Var in_img = t.leaf(input.data);
            Var bias = generator_forward(t, cgv, input, cam.world_to_camera, 256);
            Var curve = add(t, lut_g_var, bias);
            ViewScalarVars sc =
                squash_view_scalars(t, generator_forward(t, sgv, input,
                                                         cam.world_to_camera, 4));
            Var po = power_curve_node(t, sc.g_power);
            Var scurve = s_curve_node(t, sc.a_pivot, sc.b_exponent);
            Var label = pseudo_enhance_node(t, in_img, 16, 16, m_var, curve, resv, 0.5);
            Var pair = render_dual_node(t, cloud, cam, rv);
            std::size_t sz = 16 * 16 * 3;
            Var chat_in = slice(t, pair, 0, sz);
            Var chat_out = slice(t, pair, sz, sz);
            Var reg = loss_reg_node(t, chat_in, in_img, chat_out, label, 16, 16, 0.2);
            Var spa = loss_spa_node(t, chat_out, input, 16, 16);
            Var tv = loss_tv_node(t, curve);
            Var curve_loss = loss_curve_node(t, curve, cdf, po, scurve, 1.0);
            Var cc = loss_cc_view_node(t, chat_out, sc.s_minkowski, 16, 16);
            Var total = loss_total_node(t, reg, spa, tv, curve_loss, cc, 0.1);
            ps.backward(total);
            return t.scalar(total);
        };
        reports.push_back(finite_diff_check("loss_total", obj, params, kTol, kStep, 8));
    }

    return reports;
}

}  // namespace splatcurve
