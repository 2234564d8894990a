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

#include <optional>
#include <vector>

#include "splatcurve/image.hpp"

namespace splatcurve {

/// PSNR in dB against peak 1.0, capped at 99.0 for identical images.
double psnr(const Image& a, const Image& b);

/// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), C1=(0.01)^2,
/// C2=(0.03)^2, valid windows only, computed per channel then averaged.
double ssim(const Image& a, const Image& b);

/// sRGB decode -> linear RGB -> XYZ (sRGB/D65 primaries) -> CIELab (D65).
LabImage rgb_to_lab(const Image& img);

struct ChromaDispersion {
    double std_a = 0.0;
    double std_b = 0.0;
    double pooled = 0.0;  // sqrt(var_a + var_b)
};

/// Pools (a*, b*) samples over the masked pixels of all images and returns
/// per-axis standard deviations. The mask indexes pixels row-major; absent
/// mask means all pixels.
ChromaDispersion chroma_dispersion(const std::vector<Image>& images,
                                   const std::optional<std::vector<std::size_t>>& mask = std::nullopt);

}  // namespace splatcurve
