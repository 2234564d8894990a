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
#include <cstdio>
#include <filesystem>
#include <random>

#include "splatcurve/image.hpp"
#include "splatcurve/metrics.hpp"

using namespace splatcurve;
namespace fs = std::filesystem;

namespace {

Image random_image(std::size_t w, std::size_t h, std::uint64_t seed,
                   bool grid_aligned = false) {
    std::mt19937_64 rng(seed);
    Image img(w, h);
    for (double& v : img.data) {
        v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (grid_aligned) v = std::round(v * 255.0) / 255.0;
    }
    return img;
}

Image uniform(std::size_t w, std::size_t h, double r, double g, double b) {
    Image img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.data[3 * i] = r;
        img.data[3 * i + 1] = g;
        img.data[3 * i + 2] = b;
    }
    return img;
}

fs::path tmp_png(const char* name) {
    return fs::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("zero-sized image is rejected") {
    CHECK_THROWS_AS(Image(0, 4), DataError);
}

TEST_CASE("png round-trip on 8-bit grid values") {
    Image img = random_image(9, 7, 11, true);
    fs::path p = tmp_png("sc_roundtrip8.png");
    save_image(img, p.string());
    Image back = load_image(p.string());
    REQUIRE(back.same_size(img));
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
    }
    fs::remove(p);
}

TEST_CASE("png 16-bit round-trip keeps 16-bit grid values") {
    Image img = random_image(5, 5, 12);
    for (double& v : img.data) v = std::round(v * 65535.0) / 65535.0;
    fs::path p = tmp_png("sc_roundtrip16.png");
    save_image(img, p.string(), 16);
    Image back = load_image(p.string());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
    }
    fs::remove(p);
}

TEST_CASE("save rounds to nearest: 0.5 becomes 128/255, 1.0 becomes 255") {
    Image img = uniform(3, 3, 0.5, 1.0, 0.0);
    fs::path p = tmp_png("sc_round.png");
    save_image(img, p.string());
    Image back = load_image(p.string());
    CHECK(back.at(0, 0, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
    CHECK(back.at(0, 0, 1) == 1.0);
    CHECK(back.at(0, 0, 2) == 0.0);
    fs::remove(p);
}

TEST_CASE("load rejects missing file") {
    CHECK_THROWS_AS(load_image("/nonexistent/sc_missing.png"), DataError);
}

TEST_CASE("psnr: cap, known values, symmetry, monotonicity") {
    Image a = random_image(16, 16, 21);
    CHECK(psnr(a, a) == 99.0);

    Image b = a;
    for (double& v : b.data) v = std::min(1.0, v);
    Image half = uniform(8, 8, 0.2, 0.2, 0.2);
    Image half_plus = uniform(8, 8, 0.3, 0.3, 0.3);
    CHECK(psnr(half, half_plus) == doctest::Approx(20.0).epsilon(1e-12));
    Image big = uniform(8, 8, 0.7, 0.7, 0.7);
    CHECK(psnr(half, big) == doctest::Approx(10.0 * std::log10(1.0 / 0.25)).epsilon(1e-12));
    CHECK(psnr(half, big) == psnr(big, half));

    double prev = 99.0;
    for (double d : {0.05, 0.1, 0.2, 0.4}) {
        Image shifted = uniform(8, 8, 0.2 + d, 0.2 + d, 0.2 + d);
        double cur = psnr(half, shifted);
        CHECK(cur < prev);
        prev = cur;
    }

    Image wrong(4, 4);
    CHECK_THROWS_AS(psnr(a, wrong), DataError);
}

TEST_CASE("ssim: identity, symmetry, constant-patch closed form") {
    Image a = random_image(16, 16, 31);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));

    Image b = random_image(16, 16, 32);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));

    // Constant patches 0 and 1: SSIM = C1/(1+C1) * C2/(... ) reduces to
    // ((2*mu_a*mu_b+C1)(2*cov+C2)) / ((mu_a^2+mu_b^2+C1)(var_a+var_b+C2))
    // = (C1*C2)/((1+C1)*C2) = C1/(1+C1).
    Image zero = uniform(12, 12, 0, 0, 0);
    Image one = uniform(12, 12, 1, 1, 1);
    double c1 = 0.01 * 0.01;
    CHECK(ssim(zero, one) == doctest::Approx(c1 / (1.0 + c1)).epsilon(1e-9));

    Image tiny(8, 8);
    CHECK_THROWS_AS(ssim(tiny, tiny), DataError);
}

TEST_CASE("rgb_to_lab anchors: white, black, mid gray, neutral axis") {
    LabImage lab = rgb_to_lab(uniform(1, 1, 1, 1, 1));
    CHECK(lab.L[0] == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(std::abs(lab.a[0]) < 0.5);
    CHECK(std::abs(lab.b[0]) < 0.5);

    lab = rgb_to_lab(uniform(1, 1, 0, 0, 0));
    CHECK(lab.L[0] == doctest::Approx(0.0).epsilon(1e-9));

    for (double g : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        lab = rgb_to_lab(uniform(1, 1, g, g, g));
        CHECK(std::abs(lab.a[0]) < 0.5);
        CHECK(std::abs(lab.b[0]) < 0.5);
    }
}

TEST_CASE("rgb_to_lab pure red matches reference") {
    // sRGB (1,0,0) under D65: L*=53.2408, a*=80.0925, b*=67.2032.
    LabImage lab = rgb_to_lab(uniform(1, 1, 1, 0, 0));
    CHECK(lab.L[0] == doctest::Approx(53.2408).epsilon(1e-3));
    CHECK(lab.a[0] == doctest::Approx(80.0925).epsilon(1e-3));
    CHECK(lab.b[0] == doctest::Approx(67.2032).epsilon(1e-3));
}

TEST_CASE("chroma_dispersion: neutral grays give zero, tint gives positive") {
    std::vector<Image> grays = {uniform(4, 4, 0.3, 0.3, 0.3),
                                uniform(4, 4, 0.7, 0.7, 0.7)};
    ChromaDispersion d = chroma_dispersion(grays);
    CHECK(d.pooled < 0.5);

    std::vector<Image> mixed = {uniform(4, 4, 0.5, 0.5, 0.5),
                                uniform(4, 4, 0.8, 0.5, 0.2)};
    ChromaDispersion d2 = chroma_dispersion(mixed);
    CHECK(d2.pooled > 5.0);
    CHECK(d2.pooled == doctest::Approx(std::sqrt(d2.std_a * d2.std_a +
                                                 d2.std_b * d2.std_b))
                           .epsilon(1e-12));
}

TEST_CASE("chroma_dispersion mask restricts the sample") {
    Image a = uniform(2, 2, 0.5, 0.5, 0.5);
    a.at(1, 1, 0) = 0.9;  // one tinted pixel
    std::vector<Image> views = {a, uniform(2, 2, 0.5, 0.5, 0.5)};
    std::vector<std::size_t> neutral_mask = {0, 1, 2};
    ChromaDispersion masked = chroma_dispersion(views, neutral_mask);
    ChromaDispersion full = chroma_dispersion(views);
    CHECK(masked.pooled < 0.5);
    CHECK(full.pooled > masked.pooled);

    CHECK_THROWS_AS(chroma_dispersion(views, std::vector<std::size_t>{}), DataError);
    CHECK_THROWS_AS(chroma_dispersion({a}), DataError);
}
