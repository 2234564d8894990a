/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace splatcurve {

namespace {

// CIE 1931 2-degree color-matching functions, 380-780 nm at 5 nm steps,
// tabulated from the Wyman-Sloan-Shirley multi-lobe Gaussian fit.
constexpr int kCmfSamples = 81;
constexpr double kCmf[kCmfSamples][3] = {
    {0.00019871, 0.00024854, 0.00674624},  // 380 nm
    {0.00063515, 0.00037959, 0.01193498},  // 385 nm
    {0.00184137, 0.00057318, 0.02056485},  // 390 nm
    {0.00484173, 0.00085574, 0.03507582},  // 395 nm
    {0.01154659, 0.00126313, 0.06079499},  // 400 nm
    {0.02497447, 0.00184341, 0.10957313},  // 405 nm
    {0.04899212, 0.00265985, 0.20411363},  // 410 nm
    {0.08716461, 0.00379453, 0.37668608},  // 415 nm
    {0.14064769, 0.00535208, 0.65220019},  // 420 nm
    {0.20582248, 0.00746365, 1.01524731},  // 425 nm
    {0.27314850, 0.01029067, 1.38623690},  // 430 nm
    {0.32870312, 0.01402815, 1.64440077},  // 435 nm
    {0.35859576, 0.01890696, 1.73419882},  // 440 nm
    {0.35849233, 0.02519472, 1.77641617},  // 445 nm
    {0.34371675, 0.03319479, 1.78158091},  // 450 nm
    {0.31719319, 0.04324359, 1.74698706},  // 455 nm
    {0.28104655, 0.05570773, 1.67154326},  // 460 nm
    {0.23810018, 0.07098655, 1.51893397},  // 465 nm
    {0.19154448, 0.08953218, 1.29516835},  // 470 nm
    {0.14464986, 0.11190913, 1.04491407},  // 475 nm
    {0.10055437, 0.13891934, 0.81027531},  // 480 nm
    {0.06211179, 0.17179880, 0.61576068},  // 485 nm
    {0.03176275, 0.21242353, 0.46637669},  // 490 nm
    {0.01140213, 0.26334354, 0.35505567},  // 495 nm
    {0.00225333, 0.32735772, 0.27144376},  // 500 nm
    {0.00433486, 0.40639756, 0.20705612},  // 505 nm
    {0.01654377, 0.49983757, 0.15647916},  // 510 nm
    {0.03856369, 0.60293210, 0.11656798},  // 515 nm
    {0.07004303, 0.70649772, 0.08535398},  // 520 nm
    {0.11061554, 0.79869229, 0.06135088},  // 525 nm
    {0.15991350, 0.86864005, 0.04326598},  // 530 nm
    {0.21753529, 0.91675412, 0.02993125},  // 535 nm
    {0.28297244, 0.95393878, 0.02031109},  // 540 nm
    {0.35550862, 0.97987780, 0.01351965},  // 545 nm
    {0.43410955, 0.99446404, 0.00882715},  // 550 nm
    {0.51732716, 0.99803862, 0.00565325},  // 555 nm
    {0.60324077, 0.99128193, 0.00355139},  // 560 nm
    {0.68945432, 0.97509469, 0.00218837},  // 565 nm
    {0.77315988, 0.95039783, 0.00132271},  // 570 nm
    {0.85126816, 0.91608581, 0.00078421},  // 575 nm
    {0.92059604, 0.87244574, 0.00045606},  // 580 nm
    {0.97809214, 0.82086846, 0.00026016},  // 585 nm
    {1.02107547, 0.76289601, 0.00014557},  // 590 nm
    {1.04745918, 0.70018011, 0.00007990},  // 595 nm
    {1.05592570, 0.63443207, 0.00004301},  // 600 nm
    {1.04122249, 0.56736327, 0.00002271},  // 605 nm
    {1.00034562, 0.50061884, 0.00001177},  // 610 nm
    {0.93638797, 0.43571016, 0.00000598},  // 615 nm
    {0.85400855, 0.37395307, 0.00000298},  // 620 nm
    {0.75887452, 0.31641876, 0.00000146},  // 625 nm
    {0.65702126, 0.26390244, 0.00000070},  // 630 nm
    {0.55423091, 0.21691256, 0.00000033},  // 635 nm
    {0.45551639, 0.17568031, 0.00000015},  // 640 nm
    {0.36477012, 0.14018691, 0.00000007},  // 645 nm
    {0.28460106, 0.11020390, 0.00000003},  // 650 nm
    {0.21634944, 0.08534138, 0.00000001},  // 655 nm
    {0.16024225, 0.06509847, 0.00000001},  // 660 nm
    {0.11563794, 0.04891159, 0.00000000},  // 665 nm
    {0.08130657, 0.03619665, 0.00000000},  // 670 nm
    {0.05569971, 0.02638339, 0.00000000},  // 675 nm
    {0.03717768, 0.01894047, 0.00000000},  // 680 nm
    {0.02417763, 0.01339193, 0.00000000},  // 685 nm
    {0.01531959, 0.00932577, 0.00000000},  // 690 nm
    {0.00945763, 0.00639606, 0.00000000},  // 695 nm
    {0.00568879, 0.00432040, 0.00000000},  // 700 nm
    {0.00333395, 0.00287421, 0.00000000},  // 705 nm
    {0.00190371, 0.00188320, 0.00000000},  // 710 nm
    {0.00105912, 0.00121522, 0.00000000},  // 715 nm
    {0.00057410, 0.00077232, 0.00000000},  // 720 nm
    {0.00030321, 0.00048341, 0.00000000},  // 725 nm
    {0.00015602, 0.00029800, 0.00000000},  // 730 nm
    {0.00007822, 0.00018093, 0.00000000},  // 735 nm
    {0.00003821, 0.00010818, 0.00000000},  // 740 nm
    {0.00001819, 0.00006371, 0.00000000},  // 745 nm
    {0.00000843, 0.00003695, 0.00000000},  // 750 nm
    {0.00000381, 0.00002111, 0.00000000},  // 755 nm
    {0.00000168, 0.00001187, 0.00000000},  // 760 nm
    {0.00000072, 0.00000658, 0.00000000},  // 765 nm
    {0.00000030, 0.00000359, 0.00000000},  // 770 nm
    {0.00000012, 0.00000193, 0.00000000},  // 775 nm
    {0.00000005, 0.00000102, 0.00000000},  // 780 nm
};
constexpr double kLambda0Nm = 380.0;
constexpr double kLambdaStepNm = 5.0;

// Second radiation constant hc/k in m*K.
constexpr double kC2 = 1.438776877e-2;

double planck_radiance_rel(double lambda_m, double temperature_k) {
    return 1.0 / (std::pow(lambda_m, 5.0) * std::expm1(kC2 / (lambda_m * temperature_k)));
}

// Channel floor keeping every IlluminantRGB component strictly positive even
// when the blackbody chromaticity falls outside the sRGB gamut (below ~2000K
// the blue primary coordinate is negative).
constexpr double kChannelFloor = 1e-4;

}  // namespace

IlluminantRGB planck_illuminant(double temperature_k) {
    if (temperature_k < 1000.0 || temperature_k > 15000.0) {
        throw DataError("planck_illuminant: temperature out of range [1000, 15000] K");
    }
    double spectrum[kCmfSamples];
    double peak = 0.0;
    for (int i = 0; i < kCmfSamples; ++i) {
        double lambda = (kLambda0Nm + i * kLambdaStepNm) * 1e-9;
        spectrum[i] = planck_radiance_rel(lambda, temperature_k);
        peak = std::max(peak, spectrum[i]);
    }
    double xyz[3] = {0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) {
        // Trapezoidal rule on the 5 nm grid.
        double acc = 0.5 * (spectrum[0] / peak * kCmf[0][c] +
                            spectrum[kCmfSamples - 1] / peak * kCmf[kCmfSamples - 1][c]);
        for (int i = 1; i < kCmfSamples - 1; ++i) acc += spectrum[i] / peak * kCmf[i][c];
        xyz[c] = acc * kLambdaStepNm;
    }
    // XYZ -> linear sRGB (D65).
    constexpr double M[3][3] = {{3.2404542, -1.5371385, -0.4985314},
                                {-0.9692660, 1.8760108, 0.0415560},
                                {0.0556434, -0.2040259, 1.0572252}};
    IlluminantRGB out;
    double mx = 0.0;
    for (int c = 0; c < 3; ++c) {
        double v = M[c][0] * xyz[0] + M[c][1] * xyz[1] + M[c][2] * xyz[2];
        out.rgb[c] = std::max(0.0, v);
        mx = std::max(mx, out.rgb[c]);
    }
    for (double& v : out.rgb) v = std::max(kChannelFloor, v / mx);
    return out;
}

Image apply_lightness_degradation(const Image& img, double exposure_scale, double gamma) {
    if (exposure_scale <= 0.0 || gamma <= 0.0) {
        throw DataError("lightness degradation: K and gamma must be positive");
    }
    Image out = img;
    for (double& v : out.data) {
        v = std::min(1.0, std::max(0.0, std::pow(v * exposure_scale, gamma)));
    }
    return out;
}

Image apply_color_degradation(const Image& img, double temperature_k,
                              double brightness, double contrast) {
    if (brightness <= 0.0 || contrast < 0.0) {
        throw DataError("color degradation: c_B must be positive, c_C nonnegative");
    }
    IlluminantRGB rho = planck_illuminant(temperature_k);
    Image tinted = img;
    double mean = 0.0;
    for (std::size_t i = 0; i < tinted.data.size(); ++i) {
        tinted.data[i] *= rho.rgb[i % 3];
        mean += brightness * tinted.data[i];
    }
    mean /= static_cast<double>(tinted.data.size());
    Image out = img;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        double v = brightness * contrast * tinted.data[i] + (1.0 - contrast) * mean;
        out.data[i] = std::min(1.0, std::max(0.0, v));
    }
    return out;
}

Image apply_mixed(const Image& img, const DegradationParams& params) {
    if (params.mode != DegradationMode::kMixed) {
        throw DataError("apply_mixed: params.mode must be mixed");
    }
    Image colored = apply_color_degradation(img, params.temperature_k,
                                            params.brightness, params.contrast);
    return apply_lightness_degradation(colored, params.exposure_scale, params.gamma);
}

Image apply_degradation(const Image& img, const DegradationParams& params) {
    switch (params.mode) {
        case DegradationMode::kNone:
            return img;
        case DegradationMode::kLightness:
            return apply_lightness_degradation(img, params.exposure_scale, params.gamma);
        case DegradationMode::kColor:
            return apply_color_degradation(img, params.temperature_k, params.brightness,
                                           params.contrast);
        case DegradationMode::kMixed:
            return apply_mixed(img, params);
    }
    throw DataError("apply_degradation: unknown mode");
}

DegradationProfile parse_profile(const std::string& name) {
    if (name == "none") return DegradationProfile::kNone;
    if (name == "low-light-like") return DegradationProfile::kLowLightLike;
    if (name == "overexposure-like") return DegradationProfile::kOverexposureLike;
    if (name == "varying") return DegradationProfile::kVarying;
    if (name == "cool") return DegradationProfile::kCool;
    if (name == "warm") return DegradationProfile::kWarm;
    if (name == "mixed-temp") return DegradationProfile::kMixedTemp;
    if (name == "mixed-all") return DegradationProfile::kMixedAll;
    throw DataError("unknown degradation profile: " + name);
}

std::string profile_name(DegradationProfile p) {
    switch (p) {
        case DegradationProfile::kNone: return "none";
        case DegradationProfile::kLowLightLike: return "low-light-like";
        case DegradationProfile::kOverexposureLike: return "overexposure-like";
        case DegradationProfile::kVarying: return "varying";
        case DegradationProfile::kCool: return "cool";
        case DegradationProfile::kWarm: return "warm";
        case DegradationProfile::kMixedTemp: return "mixed-temp";
        case DegradationProfile::kMixedAll: return "mixed-all";
    }
    return "unknown";
}

namespace {

// Portable uniform draw; uniform_real_distribution is avoided so streams
// stay identical across standard libraries.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

// K over (0.05, 0.8) U (1.25, 3.0), weighted by interval length.
double sample_exposure_split(std::mt19937_64& rng) {
    double len_lo = 0.8 - 0.05, len_hi = 3.0 - 1.25;
    if (uniform(rng, 0.0, len_lo + len_hi) < len_lo) return uniform(rng, 0.05, 0.8);
    return uniform(rng, 1.25, 3.0);
}

DegradationParams draw(DegradationProfile profile, std::mt19937_64& rng) {
    DegradationParams p;
    switch (profile) {
        case DegradationProfile::kNone:
            break;
        case DegradationProfile::kLowLightLike:
            p.mode = DegradationMode::kLightness;
            p.exposure_scale = uniform(rng, 0.05, 0.8);
            p.gamma = uniform(rng, 0.8, 2.5);
            break;
        case DegradationProfile::kOverexposureLike:
            p.mode = DegradationMode::kLightness;
            p.exposure_scale = uniform(rng, 1.25, 3.0);
            p.gamma = uniform(rng, 0.8, 2.5);
            break;
        case DegradationProfile::kVarying:
            p.mode = DegradationMode::kLightness;
            p.exposure_scale = sample_exposure_split(rng);
            p.gamma = uniform(rng, 0.8, 2.5);
            break;
        case DegradationProfile::kCool:
        case DegradationProfile::kWarm:
        case DegradationProfile::kMixedTemp:
            p.mode = DegradationMode::kColor;
            p.temperature_k = profile == DegradationProfile::kCool
                                  ? uniform(rng, 8000.0, 9500.0)
                                  : profile == DegradationProfile::kWarm
                                        ? uniform(rng, 1800.0, 2500.0)
                                        : uniform(rng, 1800.0, 9500.0);
            p.brightness = uniform(rng, 0.8, 1.2);
            p.contrast = uniform(rng, 0.7, 1.3);
            break;
        case DegradationProfile::kMixedAll:
            p.mode = DegradationMode::kMixed;
            p.exposure_scale = sample_exposure_split(rng);
            p.gamma = uniform(rng, 0.8, 2.5);
            p.temperature_k = uniform(rng, 2500.0, 8000.0);
            p.brightness = uniform(rng, 0.8, 1.2);
            p.contrast = uniform(rng, 0.7, 1.3);
            break;
    }
    return p;
}

bool shared_draw(DegradationProfile profile) {
    return profile == DegradationProfile::kLowLightLike ||
           profile == DegradationProfile::kOverexposureLike ||
           profile == DegradationProfile::kCool || profile == DegradationProfile::kWarm;
}

}  // namespace

std::vector<DegradationParams> sample_scene_params(DegradationProfile profile,
                                                   std::uint64_t seed,
                                                   std::size_t n_views) {
    std::mt19937_64 rng(seed);
    std::vector<DegradationParams> out;
    out.reserve(n_views);
    if (shared_draw(profile)) {
        DegradationParams p = draw(profile, rng);
        out.assign(n_views, p);
    } else {
        for (std::size_t i = 0; i < n_views; ++i) out.push_back(draw(profile, rng));
    }
    return out;
}

}  // namespace splatcurve
