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

#include <functional>
#include <string>
#include <vector>

#include "splatcurve/param.hpp"

namespace splatcurve {

struct GradReport {
    std::string op_name;
    double max_rel_err = 0.0;
    std::vector<double> entry_errors;
    bool pass = false;
};

/// A deterministic scalar objective over the current values of `params`.
/// Calling it must not mutate the parameter values. The callable is expected
/// to build a tape, bind the params, run backward, and accumulate analytic
/// gradients into Parameter::grad; finite-difference probes only use the
/// returned value (gradients accumulated during probes are discarded).
using Objective = std::function<double()>;

/// Compares the analytic gradient of `objective` against central finite
/// differences, entry by entry. `entry_budget` caps how many entries per
/// parameter are probed (a deterministic subsample when a parameter is
/// larger); pass 0 for all entries.
///
/// Relative error uses denominator max(1, |analytic|, |numeric|).
/// Throws NumericError("non-deterministic op") when two evaluations at
/// identical parameters disagree bitwise.
GradReport finite_diff_check(const std::string& op_name, Objective objective,
                             std::vector<Parameter*> params, double tolerance,
                             double step, std::size_t entry_budget = 0);

}  // namespace splatcurve
