/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace splatcurve {

namespace {

constexpr double kPsnrCap = 99.0;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& window11() {
    static const std::vector<double> win = [] {
        std::vector<double> k1(11);
        double s = 0.0;
        for (int i = 0; i < 11; ++i) {
            double d = i - 5.0;
            k1[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            s += k1[i];
        }
        for (double& v : k1) v /= s;
        std::vector<double> k2(121);
        for (int i = 0; i < 11; ++i) {
            for (int j = 0; j < 11; ++j) k2[i * 11 + j] = k1[i] * k1[j];
        }
        return k2;
    }();
    return win;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    if (!a.same_size(b)) throw DataError("psnr: dimension mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
    if (!a.same_size(b)) throw DataError("ssim: dimension mismatch");
    if (a.width < 11 || a.height < 11) throw DataError("ssim: image smaller than window");
    const std::vector<double>& win = window11();
    std::size_t oh = a.height - 10, ow = a.width - 10;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        double channel_sum = 0.0;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
                for (std::size_t ky = 0; ky < 11; ++ky) {
                    for (std::size_t kx = 0; kx < 11; ++kx) {
                        double wgt = win[ky * 11 + kx];
                        double va = a.at(ox + kx, oy + ky, c);
                        double vb = b.at(ox + kx, oy + ky, c);
                        mx += wgt * va;
                        my += wgt * vb;
                        mxx += wgt * va * va;
                        myy += wgt * vb * vb;
                        mxy += wgt * va * vb;
                    }
                }
                double vx = mxx - mx * mx;
                double vy = myy - my * my;
                double cov = mxy - mx * my;
                double num = (2.0 * mx * my + kC1) * (2.0 * cov + kC2);
                double den = (mx * mx + my * my + kC1) * (vx + vy + kC2);
                channel_sum += num / den;
            }
        }
        total += channel_sum / static_cast<double>(oh * ow);
    }
    return total / 3.0;
}

namespace {

double srgb_decode(double c) {
    c = std::min(1.0, std::max(0.0, c));
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double kDelta = 6.0 / 29.0;
    return t > kDelta * kDelta * kDelta
               ? std::cbrt(t)
               : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

}  // namespace

LabImage rgb_to_lab(const Image& img) {
    // sRGB/D65 primaries; D65 reference white.
    constexpr double M[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                                {0.2126729, 0.7151522, 0.0721750},
                                {0.0193339, 0.1191920, 0.9503041}};
    constexpr double Xn = 0.95047, Yn = 1.0, Zn = 1.08883;

    LabImage lab;
    lab.width = img.width;
    lab.height = img.height;
    std::size_t n = img.pixel_count();
    lab.L.resize(n);
    lab.a.resize(n);
    lab.b.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        double r = srgb_decode(img.data[3 * p]);
        double g = srgb_decode(img.data[3 * p + 1]);
        double b = srgb_decode(img.data[3 * p + 2]);
        double X = M[0][0] * r + M[0][1] * g + M[0][2] * b;
        double Y = M[1][0] * r + M[1][1] * g + M[1][2] * b;
        double Z = M[2][0] * r + M[2][1] * g + M[2][2] * b;
        double fx = lab_f(X / Xn), fy = lab_f(Y / Yn), fz = lab_f(Z / Zn);
        lab.L[p] = 116.0 * fy - 16.0;
        lab.a[p] = 500.0 * (fx - fy);
        lab.b[p] = 200.0 * (fy - fz);
    }
    return lab;
}

ChromaDispersion chroma_dispersion(const std::vector<Image>& images,
                                   const std::optional<std::vector<std::size_t>>& mask) {
    if (images.size() < 2) throw DataError("chroma_dispersion: need at least 2 images");
    for (const Image& im : images) {
        if (!im.same_size(images[0])) throw DataError("chroma_dispersion: dimension mismatch");
    }
    if (mask && mask->empty()) throw DataError("chroma_dispersion: empty mask");

    double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0;
    std::size_t count = 0;
    for (const Image& im : images) {
        LabImage lab = rgb_to_lab(im);
        auto accumulate = [&](std::size_t p) {
            sa += lab.a[p];
            sb += lab.b[p];
            saa += lab.a[p] * lab.a[p];
            sbb += lab.b[p] * lab.b[p];
            ++count;
        };
        if (mask) {
            for (std::size_t p : *mask) accumulate(p);
        } else {
            for (std::size_t p = 0; p < im.pixel_count(); ++p) accumulate(p);
        }
    }
    double inv = 1.0 / static_cast<double>(count);
    double var_a = std::max(0.0, saa * inv - sa * inv * sa * inv);
    double var_b = std::max(0.0, sbb * inv - sb * inv * sb * inv);
    ChromaDispersion d;
    d.std_a = std::sqrt(var_a);
    d.std_b = std::sqrt(var_b);
    d.pooled = std::sqrt(var_a + var_b);
    return d;
}

}  // namespace splatcurve
