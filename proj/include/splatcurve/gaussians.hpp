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
#include <cstddef>
#include <string>
#include <vector>

#include "splatcurve/errors.hpp"

namespace splatcurve {

/// Anisotropic 3D Gaussian with dual color attributes. Covariance is
/// R S^2 R^T with S = diag(exp(log_scales)) and R from the (normalized)
/// quaternion; opacity is sigmoid(opacity_logit).
struct Gaussian {
    std::array<double, 3> mu{0, 0, 0};
    std::array<double, 3> log_scales{0, 0, 0};
    std::array<double, 4> quat{1, 0, 0, 0};  // w, x, y, z
    double opacity_logit = 0.0;
    std::array<double, 3> color{0.5, 0.5, 0.5};   // c
    std::array<double, 3> gain{1, 1, 1};          // a
    std::array<double, 3> offset{0, 0, 0};        // b
};

struct GaussianCloud {
    std::vector<Gaussian> gaussians;
};

struct Camera {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    std::size_t width = 0, height = 0;
    std::array<double, 16> world_to_camera{};  // row-major 4x4
    double near = 0.01;
    int view_id = -1;
};

/// Throws DataError unless fx,fy > 0 and the rotation block is orthonormal
/// within 1e-6.
void validate_camera(const Camera& cam);

/// Channel-wise c_out = a * c + b.
inline std::array<double, 3> adjusted_color(const std::array<double, 3>& c,
                                            const std::array<double, 3>& a,
                                            const std::array<double, 3>& b) {
    return {a[0] * c[0] + b[0], a[1] * c[1] + b[1], a[2] * c[2] + b[2]};
}

/// Scene file (JSON): gaussians + cameras.
struct Scene {
    GaussianCloud cloud;
    std::vector<Camera> cameras;
};

Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

}  // namespace splatcurve
