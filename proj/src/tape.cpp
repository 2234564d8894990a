/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/tape.hpp"

#include <cmath>

namespace splatcurve {

void Tape::backward(Var loss) {
    if (!loss.valid() || static_cast<std::size_t>(loss.id) >= nodes_.size()) {
        throw UsageError("backward: invalid loss node");
    }
    Node& ln = nodes_[loss.id];
    if (ln.val.size() != 1) {
        throw UsageError("backward on non-scalar");
    }
    if (!std::isfinite(ln.val[0])) {
        throw NumericError("non-finite objective");
    }
    // Each pass starts from clean cotangents; accumulation across passes is
    // the caller's concern (see ParamSet::harvest). Buffers are created
    // zeroed, so only passes after the first need the wipe.
    if (grads_dirty_) {
        for (Node& n : nodes_) {
            std::fill(n.grad.begin(), n.grad.end(), 0.0);
        }
    }
    grads_dirty_ = true;
    ln.grad[0] = 1.0;
    for (int i = loss.id; i >= 0; --i) {
        if (nodes_[i].back) {
            nodes_[i].back(*this, nodes_[i].grad);
        }
    }
}

}  // namespace splatcurve
