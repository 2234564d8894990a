/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace splatcurve {

GradReport finite_diff_check(const std::string& op_name, Objective objective,
                             std::vector<Parameter*> params, double tolerance,
                             double step, std::size_t entry_budget) {
    if (step <= 0.0) throw UsageError("finite_diff_check: step must be positive");

    for (Parameter* p : params) p->zero_grad();
    double loss0 = objective();
    std::vector<Vec> analytic;
    analytic.reserve(params.size());
    for (Parameter* p : params) analytic.push_back(p->grad);

    for (Parameter* p : params) p->zero_grad();
    double loss1 = objective();
    if (loss0 != loss1) throw NumericError("non-deterministic op");

    GradReport report;
    report.op_name = op_name;

    std::mt19937_64 rng(0x5eedull);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter& p = *params[pi];
        std::vector<std::size_t> entries(p.value.size());
        for (std::size_t i = 0; i < entries.size(); ++i) entries[i] = i;
        if (entry_budget > 0 && entries.size() > entry_budget) {
            std::shuffle(entries.begin(), entries.end(), rng);
            entries.resize(entry_budget);
            std::sort(entries.begin(), entries.end());
        }
        for (std::size_t i : entries) {
            double saved = p.value[i];
            p.value[i] = saved + step;
            double fp = objective();
            p.value[i] = saved - step;
            double fm = objective();
            p.value[i] = saved;
            double numeric = (fp - fm) / (2.0 * step);
            double a = analytic[pi][i];
            double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            double rel = std::abs(a - numeric) / denom;
            report.entry_errors.push_back(rel);
            report.max_rel_err = std::max(report.max_rel_err, rel);
        }
    }
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        params[pi]->grad = analytic[pi];
    }
    report.pass = report.max_rel_err < tolerance;
    return report;
}

}  // namespace splatcurve
