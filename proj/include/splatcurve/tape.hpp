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
#include <functional>
#include <vector>

#include "splatcurve/errors.hpp"

namespace splatcurve {

using Vec = std::vector<double>;

/// Handle to a node on a Tape. Only valid for the tape that created it.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over flat double arrays.
///
/// Each op appends one node holding its value and a backward closure that
/// scatters the node's cotangent into its inputs. backward() runs the
/// closures in reverse creation order, which is a valid topological order
/// because ops only consume already-created nodes.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Vec values) {
        nodes_.push_back(Node{std::move(values), {}, nullptr});
        nodes_.back().grad.assign(nodes_.back().val.size(), 0.0);
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    Var leaf_scalar(double v) { return leaf(Vec{v}); }

    /// Appends a node with a caller-supplied backward pass. The closure
    /// receives the node's accumulated output gradient and must add (never
    /// overwrite) into the gradients of its inputs via grad_mut().
    using Backward = std::function<void(Tape&, const Vec& out_grad)>;
    Var custom(Vec value, Backward back) {
        nodes_.push_back(Node{std::move(value), {}, std::move(back)});
        nodes_.back().grad.assign(nodes_.back().val.size(), 0.0);
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    const Vec& val(Var v) const { return nodes_[v.id].val; }
    const Vec& grad(Var v) const { return nodes_[v.id].grad; }
    Vec& grad_mut(Var v) { return nodes_[v.id].grad; }
    std::size_t size(Var v) const { return nodes_[v.id].val.size(); }
    double scalar(Var v) const { return nodes_[v.id].val[0]; }

    /// Propagates d(loss)/d(node) into every node's grad buffer. Each call
    /// starts from zeroed buffers; it does not accumulate across calls.
    void backward(Var loss);

    std::size_t num_nodes() const { return nodes_.size(); }

private:
    struct Node {
        Vec val;
        Vec grad;
        Backward back;
    };
    std::vector<Node> nodes_;
    bool grads_dirty_ = false;
};

}  // namespace splatcurve
