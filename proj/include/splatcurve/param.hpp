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

#include <string>
#include <vector>

#include "splatcurve/tape.hpp"

namespace splatcurve {

/// Trainable value with a same-shape additive gradient accumulator.
struct Parameter {
    std::string name;
    Vec value;
    Vec grad;

    Parameter() = default;
    Parameter(std::string n, Vec v)
        : name(std::move(n)), value(std::move(v)), grad(value.size(), 0.0) {}

    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

/// Binds Parameters to leaves on a tape for one forward/backward pass and
/// harvests tape gradients back into the parameters (additively, so repeated
/// backward passes sum).
class ParamSet {
public:
    explicit ParamSet(Tape& tape) : tape_(tape) {}

    Var bind(Parameter& p) {
        Var v = tape_.leaf(p.value);
        bound_.push_back({&p, v});
        return v;
    }

    void backward(Var loss) {
        tape_.backward(loss);
        for (auto& [p, v] : bound_) {
            const Vec& g = tape_.grad(v);
            for (std::size_t i = 0; i < g.size(); ++i) p->grad[i] += g[i];
        }
    }

private:
    Tape& tape_;
    std::vector<std::pair<Parameter*, Var>> bound_;
};

}  // namespace splatcurve
