/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/residual.hpp"

#include <cmath>
#include <random>

namespace splatcurve {

namespace {

constexpr std::size_t kWidth = 16;
constexpr std::size_t kExpand = 64;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Parameter uniform_param(const std::string& name, std::size_t count,
                        std::size_t fan_in, std::mt19937_64& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Vec v(count);
    for (double& x : v) x = (2.0 * uniform01(rng) - 1.0) * bound;
    return Parameter(name, std::move(v));
}

}  // namespace

ResidualWeights ResidualWeights::init(double clip, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ResidualWeights w;
    w.clip = clip;
    w.stem_w = uniform_param("residual.stem_w", kWidth * 3, 3, rng);
    w.stem_b = Parameter("residual.stem_b", Vec(kWidth, 0.0));
    for (int i = 0; i < 3; ++i) {
        std::string p = "residual.block" + std::to_string(i);
        ResidualBlockWeights& b = w.blocks[i];
        b.dw_w = uniform_param(p + ".dw_w", kWidth * 7 * 7, 49, rng);
        b.dw_b = Parameter(p + ".dw_b", Vec(kWidth, 0.0));
        b.ln_gamma = Parameter(p + ".ln_gamma", Vec(kWidth, 1.0));
        b.ln_beta = Parameter(p + ".ln_beta", Vec(kWidth, 0.0));
        b.pw1_w = uniform_param(p + ".pw1_w", kExpand * kWidth, kWidth, rng);
        b.pw1_b = Parameter(p + ".pw1_b", Vec(kExpand, 0.0));
        b.pw2_w = uniform_param(p + ".pw2_w", kWidth * kExpand, kExpand, rng);
        b.pw2_b = Parameter(p + ".pw2_b", Vec(kWidth, 0.0));
    }
    w.head_w = Parameter("residual.head_w", Vec(3 * kWidth, 0.0));
    w.head_b = Parameter("residual.head_b", Vec(3, 0.0));
    return w;
}

std::vector<Parameter*> ResidualWeights::all() {
    std::vector<Parameter*> out = {&stem_w, &stem_b};
    for (ResidualBlockWeights& b : blocks) {
        out.push_back(&b.dw_w);
        out.push_back(&b.dw_b);
        out.push_back(&b.ln_gamma);
        out.push_back(&b.ln_beta);
        out.push_back(&b.pw1_w);
        out.push_back(&b.pw1_b);
        out.push_back(&b.pw2_w);
        out.push_back(&b.pw2_b);
    }
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
}

ResidualVars bind_residual(ParamSet& ps, ResidualWeights& w) {
    ResidualVars v;
    v.stem_w = ps.bind(w.stem_w);
    v.stem_b = ps.bind(w.stem_b);
    for (int i = 0; i < 3; ++i) {
        v.blocks[i].dw_w = ps.bind(w.blocks[i].dw_w);
        v.blocks[i].dw_b = ps.bind(w.blocks[i].dw_b);
        v.blocks[i].ln_gamma = ps.bind(w.blocks[i].ln_gamma);
        v.blocks[i].ln_beta = ps.bind(w.blocks[i].ln_beta);
        v.blocks[i].pw1_w = ps.bind(w.blocks[i].pw1_w);
        v.blocks[i].pw1_b = ps.bind(w.blocks[i].pw1_b);
        v.blocks[i].pw2_w = ps.bind(w.blocks[i].pw2_w);
        v.blocks[i].pw2_b = ps.bind(w.blocks[i].pw2_b);
    }
    v.head_w = ps.bind(w.head_w);
    v.head_b = ps.bind(w.head_b);
    return v;
}

Var residual_forward(Tape& t, const ResidualVars& v, Var img, std::size_t h,
                     std::size_t w, double clip) {
    if (t.size(img) != h * w * 3) throw UsageError("residual_forward: bad image size");
    Var chw = hwc_to_chw(t, img, h, w, 3);
    Var x = conv2d(t, chw, 3, h, w, v.stem_w, v.stem_b, kWidth, 1, 1, 0,
                   PadMode::kZero);
    for (int i = 0; i < 3; ++i) {
        const ResidualBlockVars& b = v.blocks[i];
        Var y = depthwise_conv(t, x, kWidth, h, w, b.dw_w, b.dw_b, 7);
        y = layernorm_channels(t, y, kWidth, h * w, b.ln_gamma, b.ln_beta);
        y = conv2d(t, y, kWidth, h, w, b.pw1_w, b.pw1_b, kExpand, 1, 1, 0,
                   PadMode::kZero);
        y = gelu(t, y);
        y = conv2d(t, y, kExpand, h, w, b.pw2_w, b.pw2_b, kWidth, 1, 1, 0,
                   PadMode::kZero);
        x = add(t, x, y);
    }
    Var head = conv2d(t, x, kWidth, h, w, v.head_w, v.head_b, 3, 1, 1, 0,
                      PadMode::kZero);
    for (double val : t.val(head)) {
        if (!std::isfinite(val)) throw NumericError("non-finite residual activation");
    }
    Var clipped = clamp(t, head, -clip, clip);
    return chw_to_hwc(t, clipped, 3, h, w);
}

Var pseudo_enhance_node(Tape& t, Var img, std::size_t h, std::size_t w, Var m,
                        Var lut, const ResidualVars& rv, double clip) {
    Var global = global_adjust_node(t, img, m, lut);
    Var res = residual_forward(t, rv, img, h, w, clip);
    return clamp(t, add(t, global, res), 0.0, 1.0);
}

}  // namespace splatcurve
