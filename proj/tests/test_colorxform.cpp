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

#include "splatcurve/colorxform.hpp"
#include "splatcurve/gradcheck.hpp"

using namespace splatcurve;

namespace {

Image random_image(std::size_t w, std::size_t h, std::uint64_t seed,
                   double lo = 0.05, double hi = 0.95) {
    std::mt19937_64 rng(seed);
    Image img(w, h);
    for (double& v : img.data) {
        v = lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }
    return img;
}

// Image whose pixel values sit at LUT-segment midpoints, away from knots.
Image midpoint_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Image img(w, h);
    for (double& v : img.data) {
        v = (static_cast<double>(10 + rng() % 236) + 0.5) / 255.0;
    }
    return img;
}

}  // namespace

TEST_CASE("ToneCurve identity / constant / vec round trip") {
    ToneCurve id = ToneCurve::identity();
    for (int i = 0; i < 256; ++i) {
        CHECK(id.entries[i] == doctest::Approx(i / 255.0).epsilon(1e-15));
    }
    ToneCurve c = ToneCurve::constant(0.3);
    for (double e : c.entries) CHECK(e == 0.3);
    CHECK(ToneCurve::from_vec(id.to_vec()).entries == id.entries);
    CHECK_THROWS_AS(ToneCurve::from_vec(Vec(200, 0.0)), UsageError);
}

TEST_CASE("apply_matrix: identity, channel swap, values may leave [0,1]") {
    Image img = random_image(4, 4, 51);
    CHECK(apply_matrix(img, identity3()).data == img.data);

    Mat3 swap_rb = {0, 0, 1, 0, 1, 0, 1, 0, 0};
    Image swapped = apply_matrix(img, swap_rb);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        CHECK(swapped.data[3 * i] == img.data[3 * i + 2]);
        CHECK(swapped.data[3 * i + 1] == img.data[3 * i + 1]);
        CHECK(swapped.data[3 * i + 2] == img.data[3 * i]);
    }

    Mat3 amp = identity3();
    amp[0] = 3.0;
    Image out = apply_matrix(Image(1, 1, 0.5), amp);
    CHECK(out.data[0] == 1.5);
}

TEST_CASE("invert3: identity, diagonal, round trip, singular guard") {
    Mat3 id_inv = invert3(identity3());
    for (int i = 0; i < 9; ++i) {
        CHECK(id_inv[i] == doctest::Approx(identity3()[i]).epsilon(1e-14));
    }

    Mat3 d = {2, 0, 0, 0, 4, 0, 0, 0, 8};
    Mat3 d_inv = invert3(d);
    CHECK(d_inv[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d_inv[4] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(d_inv[8] == doctest::Approx(0.125).epsilon(1e-14));

    Mat3 m = {1.2, 0.1, -0.2, 0.05, 0.9, 0.3, -0.1, 0.2, 1.1};
    Mat3 inv = invert3(m);
    // multiply back
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += m[3 * r + k] * inv[3 * k + c];
            CHECK(s == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-10));
        }
    }
    Mat3 twice = invert3(inv);
    for (int i = 0; i < 9; ++i) CHECK(std::abs(twice[i] - m[i]) < 1e-9);

    Mat3 singular = {1, 2, 3, 2, 4, 6, 0, 0, 1};
    CHECK_THROWS_WITH_AS(invert3(singular), "singular color matrix", NumericError);
}

TEST_CASE("apply_curve: identity clamps, constants, midpoint interpolation") {
    Image img = random_image(4, 4, 52, -0.3, 1.3);
    Image out = apply_curve(img, ToneCurve::identity());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        CHECK(out.data[i] ==
              doctest::Approx(std::clamp(img.data[i], 0.0, 1.0)).epsilon(1e-12));
    }

    out = apply_curve(img, ToneCurve::constant(0.42));
    for (double v : out.data) CHECK(v == doctest::Approx(0.42).epsilon(1e-15));

    ToneCurve curve = power_curve(2.0);
    double half = apply_curve_scalar(0.5, curve);
    CHECK(half == doctest::Approx(0.5 * (curve.entries[127] + curve.entries[128]))
                      .epsilon(1e-14));
}

TEST_CASE("apply_curve is monotone for nondecreasing LUTs") {
    ToneCurve curve = s_curve(0.4, 2.5);
    double prev = apply_curve_scalar(0.0, curve);
    for (double v = 0.001; v <= 1.0; v += 0.001) {
        double cur = apply_curve_scalar(v, curve);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("compose_curve: zero bias, constant shift, commutativity") {
    ToneCurve g = power_curve(0.8);
    ToneCurve zero = ToneCurve::constant(0.0);
    CHECK(compose_curve(g, zero).entries == g.entries);

    ToneCurve shifted = compose_curve(ToneCurve::identity(), ToneCurve::constant(0.1));
    for (int i = 0; i < 256; ++i) {
        CHECK(shifted.entries[i] == doctest::Approx(i / 255.0 + 0.1).epsilon(1e-14));
    }

    ToneCurve b = s_curve(0.3, 1.7);
    CHECK(compose_curve(g, b).entries == compose_curve(b, g).entries);
}

TEST_CASE("power_curve and s_curve pinned values") {
    ToneCurve po = power_curve(2.0);
    double at_half = apply_curve_scalar(127.5 / 255.0, po);
    double expect = 0.5 * (std::pow(127.0 / 255.0 + kCurveEps, 2.0) +
                           std::pow(128.0 / 255.0 + kCurveEps, 2.0));
    CHECK(at_half == doctest::Approx(expect).epsilon(1e-12));
    CHECK(po.entries[128] ==
          doctest::Approx(std::pow(128.0 / 255.0 + 1e-4, 2.0)).epsilon(1e-12));

    // first branch at x=0.25 with A=0.5, B=2: A - A*(1 - x/A)^B
    ToneCurve s = s_curve(0.5, 2.0);
    // 0.25 is not a grid point of i/255; check the nearest exact grid value
    double x = 64.0 / 255.0;
    double manual = 0.5 - 0.5 * std::pow(1.0 - x / 0.5, 2.0);
    CHECK(s.entries[64] == doctest::Approx(manual).epsilon(1e-12));

    // B=1 reduces both branches to the identity
    ToneCurve lin = s_curve(0.37, 1.0);
    for (int i = 0; i < 256; ++i) {
        CHECK(lin.entries[i] == doctest::Approx(i / 255.0).epsilon(1e-12));
    }

    // second branch: x > A maps to A + (1-A)*((x-A)/(1-A))^B
    double x2 = 200.0 / 255.0;
    double manual2 = 0.5 + 0.5 * std::pow((x2 - 0.5) / 0.5, 2.0);
    CHECK(s.entries[200] == doctest::Approx(manual2).epsilon(1e-12));
}

TEST_CASE("cdf_curve: uniform ramp, constant image, monotone") {
    // One pixel per bin center -> uniform histogram.
    Image ramp(16, 16);
    for (std::size_t i = 0; i < 256; ++i) {
        for (int c = 0; c < 3; ++c) ramp.data[3 * i + c] = (i + 0.5) / 256.0;
    }
    ToneCurve cdf = cdf_curve(ramp);
    for (int i = 0; i < 256; ++i) {
        CHECK(std::abs(cdf.entries[i] - i / 255.0) <= 1.0 / 256.0 + 1e-12);
    }
    CHECK(cdf.entries[255] == doctest::Approx(1.0).epsilon(1e-12));

    Image flat(4, 4, 0.5);
    ToneCurve step = cdf_curve(flat);
    int bin = static_cast<int>(0.5 * 256.0);
    for (int i = 0; i < bin; ++i) CHECK(step.entries[i] == 0.0);
    for (int i = bin; i < 256; ++i) CHECK(step.entries[i] == 1.0);

    Image rnd = random_image(8, 8, 53);
    ToneCurve c = cdf_curve(rnd);
    for (int i = 1; i < 256; ++i) CHECK(c.entries[i] >= c.entries[i - 1]);
}

TEST_CASE("global_adjust: identity, power curve on uniform input") {
    Image img = random_image(4, 4, 54);
    Image out = global_adjust(img, identity3(), ToneCurve::identity());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        CHECK(out.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
    }

    Image quarter(2, 2, 0.25);
    Image rooted = global_adjust(quarter, identity3(), power_curve(0.5));
    CHECK(rooted.data[0] == doctest::Approx(apply_curve_scalar(0.25, power_curve(0.5)))
                                .epsilon(1e-12));
    CHECK(rooted.data[0] == doctest::Approx(0.5001).epsilon(1e-3));
}

TEST_CASE("tape curve priors match the plain curves") {
    Tape t;
    Var g = t.leaf_scalar(1.4);
    Var curve = power_curve_node(t, g);
    ToneCurve plain = power_curve(1.4);
    for (int i = 0; i < 256; ++i) {
        CHECK(t.val(curve)[i] == doctest::Approx(plain.entries[i]).epsilon(1e-12));
    }

    Var a = t.leaf_scalar(0.3);
    Var b = t.leaf_scalar(2.1);
    Var sc = s_curve_node(t, a, b);
    ToneCurve splain = s_curve(0.3, 2.1);
    for (int i = 0; i < 256; ++i) {
        CHECK(t.val(sc)[i] == doctest::Approx(splain.entries[i]).epsilon(1e-12));
    }
}

TEST_CASE("global_adjust_node matches the plain path and passes FD on 4x4") {
    Image img = midpoint_image(4, 4, 55);
    Mat3 m = identity3();
    m[1] = 3e-4;
    m[3] = -2e-4;
    ToneCurve curve = power_curve(1.2);

    Tape t;
    Var iv = t.leaf(img.data);
    Var mv = t.leaf(Vec(m.begin(), m.end()));
    Var lv = t.leaf(curve.to_vec());
    Var out = global_adjust_node(t, iv, mv, lv);
    Image plain = global_adjust(img, m, curve);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        CHECK(t.val(out)[i] == doctest::Approx(plain.data[i]).epsilon(1e-10));
    }

    Parameter p_img("img", img.data);
    Parameter p_m("m", Vec(m.begin(), m.end()));
    Parameter p_lut("lut", curve.to_vec());
    auto obj = [&] {
        Tape tape;
        ParamSet ps(tape);
        Var o = global_adjust_node(tape, ps.bind(p_img), ps.bind(p_m), ps.bind(p_lut));
        Var loss = mean(tape, square(tape, o));
        ps.backward(loss);
        return tape.scalar(loss);
    };
    GradReport r = finite_diff_check("global_adjust", obj, {&p_img, &p_m, &p_lut},
                                     1e-4, 1e-5, 40);
    CHECK(r.pass);
}
