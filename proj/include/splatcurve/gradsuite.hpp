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

#include <vector>

#include "splatcurve/gradcheck.hpp"

namespace splatcurve {

/// Finite-difference verification of every user-facing differentiable op
/// (tolerance 1e-4, step 1e-5, float64). One report per op.
std::vector<GradReport> run_gradient_suite();

}  // namespace splatcurve
