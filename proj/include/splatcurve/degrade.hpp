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
#include <cstdint>
#include <string>
#include <vector>

#include "splatcurve/image.hpp"

namespace splatcurve {

enum class DegradationMode { kNone, kLightness, kColor, kMixed };

struct DegradationParams {
    double exposure_scale = 1.0;  // K
    double gamma = 1.0;
    double temperature_k = 6504.0;  // T
    double brightness = 1.0;        // c_B
    double contrast = 1.0;          // c_C
    DegradationMode mode = DegradationMode::kNone;
};

/// sRGB color of a black-body radiator, nonnegative, max component 1.
struct IlluminantRGB {
    std::array<double, 3> rgb{1.0, 1.0, 1.0};
};

/// Integrates Planck spectral radiance over 380-780 nm against the embedded
/// CIE 1931 2-degree color-matching functions (5 nm tabulation, trapezoidal
/// rule), converts XYZ -> linear sRGB, clamps negatives, normalizes the max
/// channel to 1 and floors channels at 1e-4.
IlluminantRGB planck_illuminant(double temperature_k);

/// Per pixel/channel: clamp((c * K)^gamma, 0, 1).
Image apply_lightness_degradation(const Image& img, double exposure_scale, double gamma);

/// Von Kries tint by the Planckian illuminant at T, then brightness/contrast:
/// clamp(c_B*c_C*V + (1-c_C)*mean(c_B*V), 0, 1), mean over all pixels/channels.
Image apply_color_degradation(const Image& img, double temperature_k,
                              double brightness, double contrast);

/// Color degradation first, then lightness (both clamped at the end).
Image apply_mixed(const Image& img, const DegradationParams& params);

Image apply_degradation(const Image& img, const DegradationParams& params);

enum class DegradationProfile {
    kNone,
    kLowLightLike,
    kOverexposureLike,
    kVarying,
    kCool,
    kWarm,
    kMixedTemp,
    kMixedAll,
};

DegradationProfile parse_profile(const std::string& name);
std::string profile_name(DegradationProfile p);

/// Per-view parameter draws for one scene. "varying", "mixed-temp" and
/// "mixed-all" draw independently per view; "low-light-like",
/// "overexposure-like", "cool" and "warm" share one draw across the scene.
std::vector<DegradationParams> sample_scene_params(DegradationProfile profile,
                                                   std::uint64_t seed,
                                                   std::size_t n_views);

}  // namespace splatcurve
