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

#include <cstddef>
#include <string>
#include <vector>

#include "splatcurve/errors.hpp"

namespace splatcurve {

/// H x W x 3 grid of sRGB-encoded intensities, interleaved R,G,B.
/// Stored pixels live in [0,1]; training-time intermediates may exceed the
/// range before final clamping.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> data;  // height * width * 3

    Image() = default;
    Image(std::size_t w, std::size_t h, double fill = 0.0)
        : width(w), height(h), data(w * h * 3, fill) {
        if (w < 1 || h < 1) throw DataError("zero-sized image");
    }

    double& at(std::size_t x, std::size_t y, std::size_t c) {
        return data[(y * width + x) * 3 + c];
    }
    double at(std::size_t x, std::size_t y, std::size_t c) const {
        return data[(y * width + x) * 3 + c];
    }
    std::size_t pixel_count() const { return width * height; }

    bool same_size(const Image& o) const {
        return width == o.width && height == o.height;
    }
};

/// Per-pixel CIELab values (D65 reference white), planar L*, a*, b*.
struct LabImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> L;
    std::vector<double> a;
    std::vector<double> b;
};

Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path, int bit_depth = 8);

}  // namespace splatcurve
