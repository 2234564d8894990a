/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/generators.hpp"

#include <cmath>
#include <random>

namespace splatcurve {

namespace {

constexpr std::size_t kTrunkDim = 16;
constexpr std::size_t kTokens = 64;
constexpr std::size_t kFfHidden = 64;
const double kLn4 = std::log(4.0);

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

GeneratorWeights GeneratorWeights::init(std::size_t out_dim, std::uint64_t seed,
                                        const std::string& prefix) {
    std::mt19937_64 rng(seed);
    GeneratorWeights w;
    w.out_dim = out_dim;
    w.conv1_w = uniform_param(prefix + ".conv1_w", 16 * 3 * 3 * 3, 3 * 9, rng);
    w.conv1_b = Parameter(prefix + ".conv1_b", Vec(16, 0.0));
    w.conv2_w = uniform_param(prefix + ".conv2_w", 16 * 16 * 3 * 3, 16 * 9, rng);
    w.conv2_b = Parameter(prefix + ".conv2_b", Vec(16, 0.0));
    w.key_w = uniform_param(prefix + ".key_w", 16 * 16, 16, rng);
    w.key_b = Parameter(prefix + ".key_b", Vec(16, 0.0));
    w.value_w = uniform_param(prefix + ".value_w", 16 * 16, 16, rng);
    w.value_b = Parameter(prefix + ".value_b", Vec(16, 0.0));
    w.query_w = uniform_param(prefix + ".query_w", 16 * 16, 16, rng);
    w.query_b = Parameter(prefix + ".query_b", Vec(16, 0.0));
    w.ff1_w = uniform_param(prefix + ".ff1_w", 16 * kFfHidden, 16, rng);
    w.ff1_b = Parameter(prefix + ".ff1_b", Vec(kFfHidden, 0.0));
    w.ff2_w = Parameter(prefix + ".ff2_w", Vec(kFfHidden * out_dim, 0.0));
    w.ff2_b = Parameter(prefix + ".ff2_b", Vec(out_dim, 0.0));
    return w;
}

std::vector<Parameter*> GeneratorWeights::all() {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &key_w,   &key_b,  &value_w,
            &value_b, &query_w, &query_b, &ff1_w,   &ff1_b,   &ff2_w,  &ff2_b};
}

GeneratorVars bind_generator(ParamSet& ps, GeneratorWeights& w) {
    GeneratorVars v;
    v.conv1_w = ps.bind(w.conv1_w);
    v.conv1_b = ps.bind(w.conv1_b);
    v.conv2_w = ps.bind(w.conv2_w);
    v.conv2_b = ps.bind(w.conv2_b);
    v.key_w = ps.bind(w.key_w);
    v.key_b = ps.bind(w.key_b);
    v.value_w = ps.bind(w.value_w);
    v.value_b = ps.bind(w.value_b);
    v.query_w = ps.bind(w.query_w);
    v.query_b = ps.bind(w.query_b);
    v.ff1_w = ps.bind(w.ff1_w);
    v.ff1_b = ps.bind(w.ff1_b);
    v.ff2_w = ps.bind(w.ff2_w);
    v.ff2_b = ps.bind(w.ff2_b);
    return v;
}

Var generator_forward(Tape& t, const GeneratorVars& v, const Image& img,
                      const std::array<double, 16>& camera_matrix,
                      std::size_t out_dim) {
    Var pix = t.leaf(img.data);
    Var chw = hwc_to_chw(t, pix, img.height, img.width, 3);
    Var pooled = avgpool_to(t, chw, 3, img.height, img.width, 32, 32);
    Var c1 = conv2d(t, pooled, 3, 32, 32, v.conv1_w, v.conv1_b, kTrunkDim, 3, 2, 1,
                    PadMode::kZero);
    c1 = gelu(t, c1);
    Var c2 = conv2d(t, c1, kTrunkDim, 16, 16, v.conv2_w, v.conv2_b, kTrunkDim, 3, 2,
                    1, PadMode::kZero);
    c2 = gelu(t, c2);

    // 16 x 8 x 8 feature map -> 64 tokens of dim 16 (token-major).
    Var tokens = chw_to_hwc(t, c2, kTrunkDim, 8, 8);
    Var keys = add_rowbroadcast(t, matmul(t, tokens, v.key_w, kTokens, kTrunkDim, kTrunkDim),
                                v.key_b, kTokens, kTrunkDim);
    Var values = add_rowbroadcast(
        t, matmul(t, tokens, v.value_w, kTokens, kTrunkDim, kTrunkDim), v.value_b,
        kTokens, kTrunkDim);

    Var cam = t.leaf(Vec(camera_matrix.begin(), camera_matrix.end()));
    Var query = add(t, matmul(t, cam, v.query_w, 1, kTrunkDim, kTrunkDim), v.query_b);

    // scores[i] = <key_i, query> / sqrt(dim)
    Var scores = matmul(t, keys, query, kTokens, kTrunkDim, 1);
    scores = mul_const(t, scores, 1.0 / std::sqrt(static_cast<double>(kTrunkDim)));
    Var attn = softmax(t, scores);
    Var ctx = matmul(t, attn, values, 1, kTokens, kTrunkDim);

    Var h = add(t, matmul(t, ctx, v.ff1_w, 1, kTrunkDim, kFfHidden), v.ff1_b);
    h = gelu(t, h);
    Var out = add(t, matmul(t, h, v.ff2_w, 1, kFfHidden, out_dim), v.ff2_b);

    for (double x : t.val(out)) {
        if (!std::isfinite(x)) throw NumericError("non-finite generator activation");
    }
    return out;
}

ViewScalarVars squash_view_scalars(Tape& t, Var raw4) {
    if (t.size(raw4) != 4) throw UsageError("squash_view_scalars: expected 4 entries");
    Var rs = slice(t, raw4, 0, 1);
    Var rg = slice(t, raw4, 1, 1);
    Var ra = slice(t, raw4, 2, 1);
    Var rb = slice(t, raw4, 3, 1);
    ViewScalarVars out;
    out.s_minkowski = add_const(t, mul_const(t, sigmoid(t, rs), 11.0), 1.0);
    out.g_power = exp_op(t, mul_const(t, tanh_op(t, rg), kLn4));
    out.a_pivot = add_const(t, mul_const(t, sigmoid(t, ra), 0.9), 0.05);
    out.b_exponent = exp_op(t, mul_const(t, tanh_op(t, rb), kLn4));
    return out;
}

}  // namespace splatcurve
