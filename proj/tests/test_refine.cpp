/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "splatcurve/gradcheck.hpp"
#include "splatcurve/residual.hpp"

using namespace splatcurve;

namespace {

Image random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Image img(w, h);
    for (double& v : img.data) {
        v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
    return img;
}

void randomize_head(ResidualWeights& w, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    for (double& v : w.head_w.value) {
        v = scale * (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
    }
}

Vec run_residual(ResidualWeights& w, const Image& img) {
    Tape t;
    ParamSet ps(t);
    ResidualVars v = bind_residual(ps, w);
    Var img_v = t.leaf(img.data);
    Var out = residual_forward(t, v, img_v, img.height, img.width, w.clip);
    return t.val(out);
}

}  // namespace

TEST_CASE("zero-initialized head gives a zero residual everywhere") {
    ResidualWeights w = ResidualWeights::init(0.1, 21);
    Image img = random_image(12, 10, 71);
    Vec out = run_residual(w, img);
    REQUIRE(out.size() == img.data.size());
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("residual respects the clip bound for large weights") {
    ResidualWeights w = ResidualWeights::init(0.1, 22);
    randomize_head(w, 81, 5.0);
    Image img = random_image(10, 10, 72);
    Vec out = run_residual(w, img);
    double max_abs = 0.0;
    for (double v : out) max_abs = std::max(max_abs, std::abs(v));
    CHECK(max_abs <= 0.1);
    CHECK(max_abs > 0.0);

    ResidualWeights wc = ResidualWeights::init(0.5, 22);
    randomize_head(wc, 81, 5.0);
    Vec out_c = run_residual(wc, img);
    double max_c = 0.0;
    for (double v : out_c) max_c = std::max(max_c, std::abs(v));
    CHECK(max_c <= 0.5);
    CHECK(max_c > 0.1);
}

TEST_CASE("residual forward is deterministic") {
    ResidualWeights w = ResidualWeights::init(0.5, 23);
    randomize_head(w, 82, 0.1);
    Image img = random_image(9, 9, 73);
    CHECK(run_residual(w, img) == run_residual(w, img));
}

TEST_CASE("translation equivariance on interior pixels") {
    ResidualWeights w = ResidualWeights::init(0.5, 24);
    randomize_head(w, 83, 0.1);
    // base image and a copy shifted one pixel right, compared on a deep
    // interior region unaffected by boundary padding
    Image base = random_image(26, 26, 74);
    Image shifted(26, 26);
    for (std::size_t y = 0; y < 26; ++y) {
        for (std::size_t x = 1; x < 26; ++x) {
            for (int c = 0; c < 3; ++c) shifted.at(x, y, c) = base.at(x - 1, y, c);
        }
    }
    Vec rb = run_residual(w, base);
    Vec rs = run_residual(w, shifted);
    for (std::size_t y = 11; y < 15; ++y) {
        for (std::size_t x = 11; x < 15; ++x) {
            for (int c = 0; c < 3; ++c) {
                double a = rb[(y * 26 + (x - 1)) * 3 + c];
                double b = rs[(y * 26 + x) * 3 + c];
                CHECK(a == doctest::Approx(b).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("finite-difference check of the residual branch") {
    ResidualWeights w = ResidualWeights::init(0.5, 25);
    randomize_head(w, 84, 0.05);
    Image img = random_image(8, 8, 75);
    auto obj = [&] {
        Tape t;
        ParamSet ps(t);
        ResidualVars v = bind_residual(ps, w);
        Var out = residual_forward(t, v, t.leaf(img.data), 8, 8, w.clip);
        Var loss = mean(t, square(t, out));
        ps.backward(loss);
        return t.scalar(loss);
    };
    GradReport r = finite_diff_check("residual", obj, w.all(), 1e-4, 1e-5, 4);
    CHECK(r.pass);
}

TEST_CASE("pseudo_enhance: identity components reduce to clamp(img)") {
    ResidualWeights w = ResidualWeights::init(0.1, 26);
    Image img = random_image(8, 8, 76);
    Tape t;
    ParamSet ps(t);
    ResidualVars v = bind_residual(ps, w);
    Var img_v = t.leaf(img.data);
    Vec id_m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    Var m = t.leaf(id_m);
    Var lut = t.leaf(ToneCurve::identity().to_vec());
    Var out = pseudo_enhance_node(t, img_v, 8, 8, m, lut, v, w.clip);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        CHECK(t.val(out)[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("pseudo_enhance adds the residual on interior values and clamps") {
    ResidualWeights w = ResidualWeights::init(0.1, 27);
    randomize_head(w, 85, 0.5);
    Image img = random_image(8, 8, 77);
    for (double& v : img.data) v = 0.25 + 0.5 * v;  // keep sums interior

    Tape t;
    ParamSet ps(t);
    ResidualVars rv = bind_residual(ps, w);
    Var img_v = t.leaf(img.data);
    Vec id_m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    Var m = t.leaf(id_m);
    Var lut = t.leaf(ToneCurve::identity().to_vec());

    Var res = residual_forward(t, rv, img_v, 8, 8, w.clip);
    Var out = pseudo_enhance_node(t, img_v, 8, 8, m, lut, rv, w.clip);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        double expect = img.data[i] + t.val(res)[i];
        if (expect > 0.0 && expect < 1.0) {
            CHECK(t.val(out)[i] == doctest::Approx(expect).epsilon(1e-9));
        }
        CHECK(t.val(out)[i] >= 0.0);
        CHECK(t.val(out)[i] <= 1.0);
    }
}

TEST_CASE("finite-difference check of pseudo_enhance over all inputs") {
    ResidualWeights w = ResidualWeights::init(0.5, 28);
    randomize_head(w, 86, 0.05);
    // midpoint-grid pixels keep LUT lookups away from segment knots
    std::mt19937_64 rng(87);
    Image img(8, 8);
    for (double& v : img.data) {
        v = (static_cast<double>(10 + rng() % 236) + 0.5) / 255.0;
    }
    Parameter p_img("img", img.data);
    Parameter p_m("m", Vec{1, 3e-4, 0, -2e-4, 1, 1e-4, 0, 2e-4, 1});
    Parameter p_lut("lut", ToneCurve::identity().to_vec());
    std::vector<Parameter*> params = {&p_img, &p_m, &p_lut, &w.stem_w, &w.head_w,
                                      &w.blocks[1].dw_w};
    auto obj = [&] {
        Tape t;
        ParamSet ps(t);
        ResidualVars rv = bind_residual(ps, w);
        Var out = pseudo_enhance_node(t, ps.bind(p_img), 8, 8, ps.bind(p_m),
                                      ps.bind(p_lut), rv, w.clip);
        Var loss = mean(t, square(t, out));
        ps.backward(loss);
        return t.scalar(loss);
    };
    GradReport r = finite_diff_check("pseudo_enhance", obj, params, 1e-4, 1e-5, 6);
    CHECK(r.pass);
}
