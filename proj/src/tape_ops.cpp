/*
 * Copyright 2026 The splatcurve Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 */

#include "splatcurve/tape_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>

namespace splatcurve {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Broadcast-aware element access for binary ops.
inline double at(const Vec& v, std::size_t i) {
    return v.size() == 1 ? v[0] : v[i];
}

std::size_t binary_size(Tape& t, Var a, Var b) {
    std::size_t na = t.size(a), nb = t.size(b);
    if (na != nb && na != 1 && nb != 1) {
        throw UsageError("elementwise op: size mismatch");
    }
    return std::max(na, nb);
}

void scatter(Vec& dst, std::size_t i, double g) {
    dst[dst.size() == 1 ? 0 : i] += g;
}

// Mirror index for reflect padding (no edge repetition); requires n > 1.
inline long reflect(long i, long n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return i;
}

}  // namespace

Var add(Tape& t, Var a, Var b) {
    std::size_t n = binary_size(t, a, b);
    const Vec& va = t.val(a);
    const Vec& vb = t.val(b);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(va, i) + at(vb, i);
    return t.custom(std::move(out), [a, b](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        Vec& gb = tp.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            scatter(ga, i, g[i]);
            scatter(gb, i, g[i]);
        }
    });
}

Var sub(Tape& t, Var a, Var b) {
    std::size_t n = binary_size(t, a, b);
    const Vec& va = t.val(a);
    const Vec& vb = t.val(b);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(va, i) - at(vb, i);
    return t.custom(std::move(out), [a, b](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        Vec& gb = tp.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            scatter(ga, i, g[i]);
            scatter(gb, i, -g[i]);
        }
    });
}

Var mul(Tape& t, Var a, Var b) {
    std::size_t n = binary_size(t, a, b);
    const Vec& va = t.val(a);
    const Vec& vb = t.val(b);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(va, i) * at(vb, i);
    return t.custom(std::move(out), [a, b](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        const Vec& vb = tp.val(b);
        Vec& ga = tp.grad_mut(a);
        Vec& gb = tp.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            scatter(ga, i, g[i] * at(vb, i));
            scatter(gb, i, g[i] * at(va, i));
        }
    });
}

Var div_op(Tape& t, Var a, Var b) {
    std::size_t n = binary_size(t, a, b);
    const Vec& va = t.val(a);
    const Vec& vb = t.val(b);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(va, i) / at(vb, i);
    return t.custom(std::move(out), [a, b](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        const Vec& vb = tp.val(b);
        Vec& ga = tp.grad_mut(a);
        Vec& gb = tp.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double d = at(vb, i);
            scatter(ga, i, g[i] / d);
            scatter(gb, i, -g[i] * at(va, i) / (d * d));
        }
    });
}

Var add_const(Tape& t, Var a, double c) {
    Vec out = t.val(a);
    for (double& v : out) v += c;
    return t.custom(std::move(out), [a](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
}

Var mul_const(Tape& t, Var a, double c) {
    Vec out = t.val(a);
    for (double& v : out) v *= c;
    return t.custom(std::move(out), [a, c](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
    });
}

Var neg(Tape& t, Var a) { return mul_const(t, a, -1.0); }

Var sum(Tape& t, Var a) {
    double s = 0.0;
    for (double v : t.val(a)) s += v;
    return t.custom(Vec{s}, [a](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        for (double& v : ga) v += g[0];
    });
}

Var mean(Tape& t, Var a) {
    std::size_t n = t.size(a);
    return mul_const(t, sum(t, a), 1.0 / static_cast<double>(n));
}

Var abs_op(Tape& t, Var a) {
    Vec out = t.val(a);
    for (double& v : out) v = std::abs(v);
    return t.custom(std::move(out), [a](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (va[i] > 0.0) ga[i] += g[i];
            else if (va[i] < 0.0) ga[i] -= g[i];
        }
    });
}

Var square(Tape& t, Var a) {
    Vec out = t.val(a);
    for (double& v : out) v *= v;
    return t.custom(std::move(out), [a](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * va[i] * g[i];
    });
}

Var sqrt_op(Tape& t, Var a) {
    Vec out = t.val(a);
    for (double& v : out) v = std::sqrt(v);
    return t.custom(std::move(out), [a](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (va[i] > 0.0) ga[i] += 0.5 / std::sqrt(va[i]) * g[i];
        }
    });
}

Var exp_op(Tape& t, Var a) {
    Vec out = t.val(a);
    for (double& v : out) v = std::exp(v);
    return t.custom(std::move(out), [a](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += std::exp(va[i]) * g[i];
    });
}

Var log_op(Tape& t, Var a) {
    Vec out = t.val(a);
    for (double& v : out) v = std::log(v);
    return t.custom(std::move(out), [a](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / va[i];
    });
}

Var tanh_op(Tape& t, Var a) {
    Vec out = t.val(a);
    for (double& v : out) v = std::tanh(v);
    return t.custom(std::move(out), [a](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double th = std::tanh(va[i]);
            ga[i] += (1.0 - th * th) * g[i];
        }
    });
}

Var sigmoid(Tape& t, Var a) {
    Vec out = t.val(a);
    for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
    return t.custom(std::move(out), [a](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double s = 1.0 / (1.0 + std::exp(-va[i]));
            ga[i] += s * (1.0 - s) * g[i];
        }
    });
}

Var gelu(Tape& t, Var a) {
    Vec out = t.val(a);
    for (double& v : out) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    return t.custom(std::move(out), [a](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double x = va[i];
            double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            ga[i] += (cdf + x * pdf) * g[i];
        }
    });
}

Var pow_const(Tape& t, Var a, double p) {
    Vec out = t.val(a);
    for (double& v : out) v = std::pow(v, p);
    return t.custom(std::move(out), [a, p](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += p * std::pow(va[i], p - 1.0) * g[i];
        }
    });
}

Var pow_varexp(Tape& t, Var base, Var expo) {
    if (t.size(expo) != 1) throw UsageError("pow_varexp: exponent must be scalar");
    const Vec& vb = t.val(base);
    double e = t.scalar(expo);
    Vec out(vb.size());
    for (std::size_t i = 0; i < vb.size(); ++i) {
        out[i] = vb[i] > 0.0 ? std::pow(vb[i], e) : 0.0;
    }
    return t.custom(std::move(out), [base, expo](Tape& tp, const Vec& g) {
        const Vec& vb = tp.val(base);
        double e = tp.scalar(expo);
        Vec& gb = tp.grad_mut(base);
        Vec& ge = tp.grad_mut(expo);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (vb[i] > 0.0) {
                double y = std::pow(vb[i], e);
                gb[i] += e * y / vb[i] * g[i];
                ge[0] += y * std::log(vb[i]) * g[i];
            }
        }
    });
}

Var clamp(Tape& t, Var a, double lo, double hi) {
    Vec out = t.val(a);
    for (double& v : out) v = std::min(hi, std::max(lo, v));
    return t.custom(std::move(out), [a, lo, hi](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (va[i] >= lo && va[i] <= hi) ga[i] += g[i];
        }
    });
}

Var slice(Tape& t, Var a, std::size_t offset, std::size_t len) {
    const Vec& va = t.val(a);
    if (offset + len > va.size()) throw UsageError("slice out of range");
    Vec out(va.begin() + offset, va.begin() + offset + len);
    return t.custom(std::move(out), [a, offset](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[offset + i] += g[i];
    });
}

Var concat(Tape& t, const std::vector<Var>& parts) {
    Vec out;
    for (Var p : parts) {
        const Vec& v = t.val(p);
        out.insert(out.end(), v.begin(), v.end());
    }
    std::vector<Var> ps = parts;
    return t.custom(std::move(out), [ps](Tape& tp, const Vec& g) {
        std::size_t off = 0;
        for (Var p : ps) {
            Vec& gp = tp.grad_mut(p);
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
            off += gp.size();
        }
    });
}

Var gather(Tape& t, Var a, std::vector<std::size_t> idx) {
    const Vec& va = t.val(a);
    Vec out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = va[idx[i]];
    return t.custom(std::move(out), [a, idx = std::move(idx)](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[idx[i]] += g[i];
    });
}

Var rowwise_mat3(Tape& t, Var img, Var m) {
    const Vec& vi = t.val(img);
    const Vec& vm = t.val(m);
    if (vi.size() % 3 != 0 || vm.size() != 9) {
        throw UsageError("rowwise_mat3: bad shapes");
    }
    std::size_t n = vi.size() / 3;
    Vec out(vi.size());
    for (std::size_t p = 0; p < n; ++p) {
        const double* x = &vi[3 * p];
        for (std::size_t j = 0; j < 3; ++j) {
            out[3 * p + j] = x[0] * vm[j] + x[1] * vm[3 + j] + x[2] * vm[6 + j];
        }
    }
    return t.custom(std::move(out), [img, m, n](Tape& tp, const Vec& g) {
        const Vec& vi = tp.val(img);
        const Vec& vm = tp.val(m);
        Vec& gi = tp.grad_mut(img);
        Vec& gm = tp.grad_mut(m);
        for (std::size_t p = 0; p < n; ++p) {
            const double* x = &vi[3 * p];
            const double* go = &g[3 * p];
            for (std::size_t i = 0; i < 3; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < 3; ++j) {
                    acc += vm[3 * i + j] * go[j];
                    gm[3 * i + j] += x[i] * go[j];
                }
                gi[3 * p + i] += acc;
            }
        }
    });
}

Var inverse3(Tape& t, Var m) {
    const Vec& a = t.val(m);
    if (a.size() != 9) throw UsageError("inverse3: expected 3x3");
    double det = a[0] * (a[4] * a[8] - a[5] * a[7]) -
                 a[1] * (a[3] * a[8] - a[5] * a[6]) +
                 a[2] * (a[3] * a[7] - a[4] * a[6]);
    if (std::abs(det) < 1e-6) throw NumericError("singular color matrix");
    double id = 1.0 / det;
    Vec inv(9);
    inv[0] = (a[4] * a[8] - a[5] * a[7]) * id;
    inv[1] = (a[2] * a[7] - a[1] * a[8]) * id;
    inv[2] = (a[1] * a[5] - a[2] * a[4]) * id;
    inv[3] = (a[5] * a[6] - a[3] * a[8]) * id;
    inv[4] = (a[0] * a[8] - a[2] * a[6]) * id;
    inv[5] = (a[2] * a[3] - a[0] * a[5]) * id;
    inv[6] = (a[3] * a[7] - a[4] * a[6]) * id;
    inv[7] = (a[1] * a[6] - a[0] * a[7]) * id;
    inv[8] = (a[0] * a[4] - a[1] * a[3]) * id;
    Vec inv_copy = inv;
    return t.custom(std::move(inv), [m, inv = std::move(inv_copy)](Tape& tp, const Vec& g) {
        // dM = -Minv^T * G * Minv^T
        Vec& gm = tp.grad_mut(m);
        double tmp[9];
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < 3; ++k) acc += inv[3 * k + i] * g[3 * k + j];
                tmp[3 * i + j] = acc;
            }
        }
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < 3; ++k) acc += tmp[3 * i + k] * inv[3 * j + k];
                gm[3 * i + j] -= acc;
            }
        }
    });
}

Var lut_apply(Tape& t, Var v, Var lut) {
    if (t.size(lut) != 256) throw UsageError("lut_apply: LUT must have 256 entries");
    const Vec& vv = t.val(v);
    const Vec& e = t.val(lut);
    Vec out(vv.size());
    for (std::size_t i = 0; i < vv.size(); ++i) {
        double x = std::min(1.0, std::max(0.0, vv[i]));
        double pos = x * 255.0;
        int k = std::min(static_cast<int>(pos), 254);
        double f = pos - k;
        out[i] = (1.0 - f) * e[k] + f * e[k + 1];
    }
    return t.custom(std::move(out), [v, lut](Tape& tp, const Vec& g) {
        const Vec& vv = tp.val(v);
        const Vec& e = tp.val(lut);
        Vec& gv = tp.grad_mut(v);
        Vec& gl = tp.grad_mut(lut);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double x = std::min(1.0, std::max(0.0, vv[i]));
            double pos = x * 255.0;
            int k = std::min(static_cast<int>(pos), 254);
            double f = pos - k;
            gl[k] += (1.0 - f) * g[i];
            gl[k + 1] += f * g[i];
            if (vv[i] >= 0.0 && vv[i] <= 1.0) {
                gv[i] += 255.0 * (e[k + 1] - e[k]) * g[i];
            }
        }
    });
}

Var matmul(Tape& t, Var a, Var b, std::size_t p, std::size_t q, std::size_t r) {
    const Vec& va = t.val(a);
    const Vec& vb = t.val(b);
    if (va.size() != p * q || vb.size() != q * r) throw UsageError("matmul: bad shapes");
    Vec out(p * r, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < q; ++k) {
            double x = va[i * q + k];
            for (std::size_t j = 0; j < r; ++j) out[i * r + j] += x * vb[k * r + j];
        }
    }
    return t.custom(std::move(out), [a, b, p, q, r](Tape& tp, const Vec& g) {
        const Vec& va = tp.val(a);
        const Vec& vb = tp.val(b);
        Vec& ga = tp.grad_mut(a);
        Vec& gb = tp.grad_mut(b);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t k = 0; k < q; ++k) {
                double acc = 0.0;
                for (std::size_t j = 0; j < r; ++j) {
                    acc += g[i * r + j] * vb[k * r + j];
                    gb[k * r + j] += va[i * q + k] * g[i * r + j];
                }
                ga[i * q + k] += acc;
            }
        }
    });
}

Var add_rowbroadcast(Tape& t, Var a, Var bias, std::size_t rows, std::size_t cols) {
    const Vec& va = t.val(a);
    const Vec& vb = t.val(bias);
    if (va.size() != rows * cols || vb.size() != cols) {
        throw UsageError("add_rowbroadcast: bad shapes");
    }
    Vec out(va.size());
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = va[i * cols + j] + vb[j];
    }
    return t.custom(std::move(out), [a, bias, rows, cols](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        Vec& gb = tp.grad_mut(bias);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                ga[i * cols + j] += g[i * cols + j];
                gb[j] += g[i * cols + j];
            }
        }
    });
}

Var softmax(Tape& t, Var a) {
    const Vec& va = t.val(a);
    double mx = *std::max_element(va.begin(), va.end());
    Vec out(va.size());
    double z = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        out[i] = std::exp(va[i] - mx);
        z += out[i];
    }
    for (double& v : out) v /= z;
    Vec y = out;
    return t.custom(std::move(out), [a, y = std::move(y)](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        double dot = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - dot);
    });
}

Var channel_min3(Tape& t, Var img) {
    const Vec& v = t.val(img);
    if (v.size() % 3 != 0) throw UsageError("channel_min3: bad shape");
    std::size_t n = v.size() / 3;
    Vec out(n);
    for (std::size_t p = 0; p < n; ++p) {
        out[p] = std::min({v[3 * p], v[3 * p + 1], v[3 * p + 2]});
    }
    return t.custom(std::move(out), [img, n](Tape& tp, const Vec& g) {
        const Vec& v = tp.val(img);
        Vec& gi = tp.grad_mut(img);
        for (std::size_t p = 0; p < n; ++p) {
            std::size_t arg = 0;
            if (v[3 * p + 1] < v[3 * p + arg]) arg = 1;
            if (v[3 * p + 2] < v[3 * p + arg]) arg = 2;
            gi[3 * p + arg] += g[p];
        }
    });
}

Var conv2d(Tape& t, Var input, std::size_t in_ch, std::size_t h, std::size_t w,
           Var weights, Var bias, std::size_t out_ch, std::size_t k,
           std::size_t stride, std::size_t pad, PadMode mode) {
    const Vec& x = t.val(input);
    const Vec& wt = t.val(weights);
    const Vec& bs = t.val(bias);
    if (x.size() != in_ch * h * w || wt.size() != out_ch * in_ch * k * k ||
        bs.size() != out_ch) {
        throw UsageError("conv2d: bad shapes");
    }
    std::size_t oh = (h + 2 * pad - k) / stride + 1;
    std::size_t ow = (w + 2 * pad - k) / stride + 1;

    // Pointwise convolutions dominate the training step; keep them on a
    // dense row-times-plane path instead of the generic tap loop.
    if (k == 1 && stride == 1 && pad == 0) {
        std::size_t hw = h * w;
        Vec out(out_ch * hw);
        for (std::size_t oc = 0; oc < out_ch; ++oc) {
            double* o = &out[oc * hw];
            std::fill(o, o + hw, bs[oc]);
            for (std::size_t ic = 0; ic < in_ch; ++ic) {
                double wv = wt[oc * in_ch + ic];
                const double* xi = &x[ic * hw];
                for (std::size_t p = 0; p < hw; ++p) o[p] += wv * xi[p];
            }
        }
        return t.custom(std::move(out), [=](Tape& tp, const Vec& g) {
            const Vec& x = tp.val(input);
            const Vec& wt = tp.val(weights);
            Vec& gx = tp.grad_mut(input);
            Vec& gw = tp.grad_mut(weights);
            Vec& gb = tp.grad_mut(bias);
            for (std::size_t oc = 0; oc < out_ch; ++oc) {
                const double* go = &g[oc * hw];
                double acc_b = 0.0;
                for (std::size_t p = 0; p < hw; ++p) acc_b += go[p];
                gb[oc] += acc_b;
                for (std::size_t ic = 0; ic < in_ch; ++ic) {
                    const double* xi = &x[ic * hw];
                    double* gxi = &gx[ic * hw];
                    double wv = wt[oc * in_ch + ic];
                    double acc_w = 0.0;
                    for (std::size_t p = 0; p < hw; ++p) acc_w += xi[p] * go[p];
                    for (std::size_t p = 0; p < hw; ++p) gxi[p] += wv * go[p];
                    gw[oc * in_ch + ic] += acc_w;
                }
            }
        });
    }

    Vec out(out_ch * oh * ow, 0.0);
    auto sample = [&](std::size_t c, long y, long xx) -> double {
        if (mode == PadMode::kReflect) {
            y = reflect(y, static_cast<long>(h));
            xx = reflect(xx, static_cast<long>(w));
        } else if (y < 0 || y >= static_cast<long>(h) || xx < 0 ||
                   xx >= static_cast<long>(w)) {
            return 0.0;
        }
        return x[c * h * w + static_cast<std::size_t>(y) * w + static_cast<std::size_t>(xx)];
    };
    for (std::size_t oc = 0; oc < out_ch; ++oc) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = bs[oc];
                for (std::size_t ic = 0; ic < in_ch; ++ic) {
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            long y = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
                            long xx = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                            acc += wt[((oc * in_ch + ic) * k + ky) * k + kx] * sample(ic, y, xx);
                        }
                    }
                }
                out[(oc * oh + oy) * ow + ox] = acc;
            }
        }
    }
    return t.custom(std::move(out), [=](Tape& tp, const Vec& g) {
        const Vec& x = tp.val(input);
        const Vec& wt = tp.val(weights);
        Vec& gx = tp.grad_mut(input);
        Vec& gw = tp.grad_mut(weights);
        Vec& gb = tp.grad_mut(bias);
        auto resolve = [&](long y, long xx, std::size_t& ry, std::size_t& rx) -> bool {
            if (mode == PadMode::kReflect) {
                ry = static_cast<std::size_t>(reflect(y, static_cast<long>(h)));
                rx = static_cast<std::size_t>(reflect(xx, static_cast<long>(w)));
                return true;
            }
            if (y < 0 || y >= static_cast<long>(h) || xx < 0 || xx >= static_cast<long>(w)) {
                return false;
            }
            ry = static_cast<std::size_t>(y);
            rx = static_cast<std::size_t>(xx);
            return true;
        };
        for (std::size_t oc = 0; oc < out_ch; ++oc) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    double go = g[(oc * oh + oy) * ow + ox];
                    if (go == 0.0) continue;
                    gb[oc] += go;
                    for (std::size_t ic = 0; ic < in_ch; ++ic) {
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                long y = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
                                long xx = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                                std::size_t ry, rx;
                                if (!resolve(y, xx, ry, rx)) continue;
                                std::size_t wi = ((oc * in_ch + ic) * k + ky) * k + kx;
                                std::size_t xi = ic * h * w + ry * w + rx;
                                gw[wi] += x[xi] * go;
                                gx[xi] += wt[wi] * go;
                            }
                        }
                    }
                }
            }
        }
    });
}

Var depthwise_conv(Tape& t, Var input, std::size_t ch, std::size_t h,
                   std::size_t w, Var weights, Var bias, std::size_t k) {
    const Vec& x = t.val(input);
    const Vec& wt = t.val(weights);
    const Vec& bs = t.val(bias);
    if (x.size() != ch * h * w || wt.size() != ch * k * k || bs.size() != ch) {
        throw UsageError("depthwise_conv: bad shapes");
    }
    long half = static_cast<long>(k) / 2;
    // Reflected sample indices are the same for every channel and for the
    // backward pass; tabulate them once per call.
    auto yidx = std::make_shared<std::vector<std::size_t>>(h * k);
    auto xidx = std::make_shared<std::vector<std::size_t>>(w * k);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t ky = 0; ky < k; ++ky) {
            (*yidx)[y * k + ky] = static_cast<std::size_t>(
                reflect(static_cast<long>(y + ky) - half, static_cast<long>(h)));
        }
    }
    for (std::size_t xx = 0; xx < w; ++xx) {
        for (std::size_t kx = 0; kx < k; ++kx) {
            (*xidx)[xx * k + kx] = static_cast<std::size_t>(
                reflect(static_cast<long>(xx + kx) - half, static_cast<long>(w)));
        }
    }
    // Interior columns read a contiguous k-tap window; only border columns
    // need the reflect table.
    std::size_t lo = std::min(static_cast<std::size_t>(half), w);
    std::size_t hi = (w >= k) ? w - static_cast<std::size_t>(half) : lo;
    Vec out(ch * h * w, 0.0);
    for (std::size_t c = 0; c < ch; ++c) {
        const double* xc = &x[c * h * w];
        const double* wc = &wt[c * k * k];
        double* oc = &out[c * h * w];
        for (std::size_t y = 0; y < h; ++y) {
            const std::size_t* ys = &(*yidx)[y * k];
            auto border = [&](std::size_t xx) {
                const std::size_t* xs = &(*xidx)[xx * k];
                double acc = bs[c];
                for (std::size_t ky = 0; ky < k; ++ky) {
                    const double* xrow = xc + ys[ky] * w;
                    const double* wrow = wc + ky * k;
                    for (std::size_t kx = 0; kx < k; ++kx) {
                        acc += wrow[kx] * xrow[xs[kx]];
                    }
                }
                oc[y * w + xx] = acc;
            };
            for (std::size_t xx = 0; xx < lo; ++xx) border(xx);
            for (std::size_t xx = hi; xx < w; ++xx) border(xx);
            for (std::size_t xx = lo; xx < hi; ++xx) {
                double acc = bs[c];
                for (std::size_t ky = 0; ky < k; ++ky) {
                    const double* xrow =
                        xc + ys[ky] * w + xx - static_cast<std::size_t>(half);
                    const double* wrow = wc + ky * k;
                    for (std::size_t kx = 0; kx < k; ++kx) {
                        acc += wrow[kx] * xrow[kx];
                    }
                }
                oc[y * w + xx] = acc;
            }
        }
    }
    return t.custom(std::move(out), [=](Tape& tp, const Vec& g) {
        const Vec& x = tp.val(input);
        const Vec& wt = tp.val(weights);
        Vec& gx = tp.grad_mut(input);
        Vec& gw = tp.grad_mut(weights);
        Vec& gb = tp.grad_mut(bias);
        std::size_t lo = std::min(static_cast<std::size_t>(half), w);
        std::size_t hi = (w >= k) ? w - static_cast<std::size_t>(half) : lo;
        std::vector<double> gw_loc(k * k);
        for (std::size_t c = 0; c < ch; ++c) {
            const double* xc = &x[c * h * w];
            const double* wc = &wt[c * k * k];
            double* gxc = &gx[c * h * w];
            double* gwc = &gw[c * k * k];
            std::fill(gw_loc.begin(), gw_loc.end(), 0.0);
            double gb_loc = 0.0;
            for (std::size_t y = 0; y < h; ++y) {
                const std::size_t* ys = &(*yidx)[y * k];
                auto border = [&](std::size_t xx) {
                    double go = g[c * h * w + y * w + xx];
                    if (go == 0.0) return;
                    gb_loc += go;
                    const std::size_t* xs = &(*xidx)[xx * k];
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        const double* xrow = xc + ys[ky] * w;
                        double* gxrow = gxc + ys[ky] * w;
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            gw_loc[ky * k + kx] += xrow[xs[kx]] * go;
                            gxrow[xs[kx]] += wc[ky * k + kx] * go;
                        }
                    }
                };
                for (std::size_t xx = 0; xx < lo; ++xx) border(xx);
                for (std::size_t xx = hi; xx < w; ++xx) border(xx);
                for (std::size_t xx = lo; xx < hi; ++xx) {
                    double go = g[c * h * w + y * w + xx];
                    if (go == 0.0) continue;
                    gb_loc += go;
                    std::size_t base = xx - static_cast<std::size_t>(half);
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        const double* xrow = xc + ys[ky] * w + base;
                        double* gxrow = gxc + ys[ky] * w + base;
                        double* gwrow = &gw_loc[ky * k];
                        const double* wrow = wc + ky * k;
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            gwrow[kx] += xrow[kx] * go;
                            gxrow[kx] += wrow[kx] * go;
                        }
                    }
                }
            }
            gb[c] += gb_loc;
            for (std::size_t i = 0; i < k * k; ++i) gwc[i] += gw_loc[i];
        }
    });
}

Var layernorm_channels(Tape& t, Var input, std::size_t ch, std::size_t hw,
                       Var gamma, Var beta) {
    const Vec& x = t.val(input);
    const Vec& gm = t.val(gamma);
    const Vec& bt = t.val(beta);
    if (x.size() != ch * hw || gm.size() != ch || bt.size() != ch) {
        throw UsageError("layernorm_channels: bad shapes");
    }
    constexpr double kEps = 1e-6;
    Vec out(x.size());
    for (std::size_t p = 0; p < hw; ++p) {
        double mu = 0.0;
        for (std::size_t c = 0; c < ch; ++c) mu += x[c * hw + p];
        mu /= static_cast<double>(ch);
        double var = 0.0;
        for (std::size_t c = 0; c < ch; ++c) {
            double d = x[c * hw + p] - mu;
            var += d * d;
        }
        var /= static_cast<double>(ch);
        double inv_s = 1.0 / std::sqrt(var + kEps);
        for (std::size_t c = 0; c < ch; ++c) {
            out[c * hw + p] = gm[c] * (x[c * hw + p] - mu) * inv_s + bt[c];
        }
    }
    return t.custom(std::move(out), [=](Tape& tp, const Vec& g) {
        const Vec& x = tp.val(input);
        const Vec& gm = tp.val(gamma);
        Vec& gx = tp.grad_mut(input);
        Vec& gg = tp.grad_mut(gamma);
        Vec& gb = tp.grad_mut(beta);
        for (std::size_t p = 0; p < hw; ++p) {
            double mu = 0.0;
            for (std::size_t c = 0; c < ch; ++c) mu += x[c * hw + p];
            mu /= static_cast<double>(ch);
            double var = 0.0;
            for (std::size_t c = 0; c < ch; ++c) {
                double d = x[c * hw + p] - mu;
                var += d * d;
            }
            var /= static_cast<double>(ch);
            double inv_s = 1.0 / std::sqrt(var + kEps);
            double mean_gh = 0.0, mean_ghx = 0.0;
            for (std::size_t c = 0; c < ch; ++c) {
                double xh = (x[c * hw + p] - mu) * inv_s;
                double go = g[c * hw + p];
                double gh = gm[c] * go;
                mean_gh += gh;
                mean_ghx += gh * xh;
                gg[c] += go * xh;
                gb[c] += go;
            }
            mean_gh /= static_cast<double>(ch);
            mean_ghx /= static_cast<double>(ch);
            for (std::size_t c = 0; c < ch; ++c) {
                double xh = (x[c * hw + p] - mu) * inv_s;
                double gh = gm[c] * g[c * hw + p];
                gx[c * hw + p] += inv_s * (gh - mean_gh - xh * mean_ghx);
            }
        }
    });
}

Var avgpool_to(Tape& t, Var input, std::size_t ch, std::size_t h,
               std::size_t w, std::size_t oh, std::size_t ow) {
    const Vec& x = t.val(input);
    if (x.size() != ch * h * w) throw UsageError("avgpool_to: bad shape");
    // floor/ceil bin edges keep every bin non-empty even when oh > h
    auto lo = [](std::size_t i, std::size_t n, std::size_t on) { return i * n / on; };
    auto hi = [](std::size_t i, std::size_t n, std::size_t on) {
        return ((i + 1) * n + on - 1) / on;
    };
    Vec out(ch * oh * ow, 0.0);
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = 0.0;
                std::size_t cnt = 0;
                for (std::size_t y = lo(oy, h, oh); y < hi(oy, h, oh); ++y) {
                    for (std::size_t xx = lo(ox, w, ow); xx < hi(ox, w, ow); ++xx) {
                        acc += x[c * h * w + y * w + xx];
                        ++cnt;
                    }
                }
                out[(c * oh + oy) * ow + ox] = acc / static_cast<double>(cnt);
            }
        }
    }
    return t.custom(std::move(out), [=](Tape& tp, const Vec& g) {
        Vec& gx = tp.grad_mut(input);
        for (std::size_t c = 0; c < ch; ++c) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    std::size_t y0 = lo(oy, h, oh), y1 = hi(oy, h, oh);
                    std::size_t x0 = lo(ox, w, ow), x1 = hi(ox, w, ow);
                    double share = g[(c * oh + oy) * ow + ox] /
                                   static_cast<double>((y1 - y0) * (x1 - x0));
                    for (std::size_t y = y0; y < y1; ++y) {
                        for (std::size_t xx = x0; xx < x1; ++xx) {
                            gx[c * h * w + y * w + xx] += share;
                        }
                    }
                }
            }
        }
    });
}

Var avgpool_region(Tape& t, Var input, std::size_t h, std::size_t w, std::size_t k) {
    const Vec& x = t.val(input);
    if (x.size() != h * w) throw UsageError("avgpool_region: bad shape");
    std::size_t oh = (h + k - 1) / k;
    std::size_t ow = (w + k - 1) / k;
    Vec out(oh * ow, 0.0);
    for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
            double acc = 0.0;
            std::size_t cnt = 0;
            for (std::size_t y = oy * k; y < std::min(h, (oy + 1) * k); ++y) {
                for (std::size_t xx = ox * k; xx < std::min(w, (ox + 1) * k); ++xx) {
                    acc += x[y * w + xx];
                    ++cnt;
                }
            }
            out[oy * ow + ox] = acc / static_cast<double>(cnt);
        }
    }
    return t.custom(std::move(out), [=](Tape& tp, const Vec& g) {
        Vec& gx = tp.grad_mut(input);
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                std::size_t y1 = std::min(h, (oy + 1) * k);
                std::size_t x1 = std::min(w, (ox + 1) * k);
                std::size_t cnt = (y1 - oy * k) * (x1 - ox * k);
                double share = g[oy * ow + ox] / static_cast<double>(cnt);
                for (std::size_t y = oy * k; y < y1; ++y) {
                    for (std::size_t xx = ox * k; xx < x1; ++xx) gx[y * w + xx] += share;
                }
            }
        }
    });
}

namespace {
const std::vector<double>& ssim_kernel11_1d() {
    static const std::vector<double> kernel = [] {
        std::vector<double> k1(11);
        double s = 0.0;
        for (int i = 0; i < 11; ++i) {
            double d = i - 5.0;
            k1[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            s += k1[i];
        }
        for (double& v : k1) v /= s;
        return k1;
    }();
    return kernel;
}
}  // namespace

Var gaussian_blur11_valid(Tape& t, Var input, std::size_t h, std::size_t w) {
    const Vec& x = t.val(input);
    if (x.size() != h * w) throw UsageError("gaussian_blur11_valid: bad shape");
    if (h < 11 || w < 11) throw UsageError("gaussian_blur11_valid: image smaller than window");
    const std::vector<double>& k1 = ssim_kernel11_1d();
    std::size_t oh = h - 10, ow = w - 10;
    // The window is an outer product, so blur rows first, then columns.
    Vec tmp(h * ow, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        const double* xrow = &x[y * w];
        double* trow = &tmp[y * ow];
        for (std::size_t kx = 0; kx < 11; ++kx) {
            double kv = k1[kx];
            for (std::size_t ox = 0; ox < ow; ++ox) trow[ox] += kv * xrow[ox + kx];
        }
    }
    Vec out(oh * ow, 0.0);
    for (std::size_t oy = 0; oy < oh; ++oy) {
        double* orow = &out[oy * ow];
        for (std::size_t ky = 0; ky < 11; ++ky) {
            double kv = k1[ky];
            const double* trow = &tmp[(oy + ky) * ow];
            for (std::size_t ox = 0; ox < ow; ++ox) orow[ox] += kv * trow[ox];
        }
    }
    return t.custom(std::move(out), [=](Tape& tp, const Vec& g) {
        const std::vector<double>& k1 = ssim_kernel11_1d();
        Vec& gx = tp.grad_mut(input);
        Vec gtmp(h * ow, 0.0);
        for (std::size_t oy = 0; oy < oh; ++oy) {
            const double* grow = &g[oy * ow];
            for (std::size_t ky = 0; ky < 11; ++ky) {
                double kv = k1[ky];
                double* trow = &gtmp[(oy + ky) * ow];
                for (std::size_t ox = 0; ox < ow; ++ox) trow[ox] += kv * grow[ox];
            }
        }
        for (std::size_t y = 0; y < h; ++y) {
            const double* trow = &gtmp[y * ow];
            double* gxrow = &gx[y * w];
            for (std::size_t kx = 0; kx < 11; ++kx) {
                double kv = k1[kx];
                for (std::size_t ox = 0; ox < ow; ++ox) gxrow[ox + kx] += kv * trow[ox];
            }
        }
    });
}

namespace {
Var permute(Tape& t, Var a, std::vector<std::size_t> fwd) {
    const Vec& v = t.val(a);
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[fwd[i]];
    return t.custom(std::move(out), [a, fwd = std::move(fwd)](Tape& tp, const Vec& g) {
        Vec& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[fwd[i]] += g[i];
    });
}
}  // namespace

Var hwc_to_chw(Tape& t, Var img, std::size_t h, std::size_t w, std::size_t c) {
    std::vector<std::size_t> fwd(h * w * c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t p = 0; p < h * w; ++p) fwd[ch * h * w + p] = p * c + ch;
    }
    return permute(t, img, std::move(fwd));
}

Var chw_to_hwc(Tape& t, Var img, std::size_t c, std::size_t h, std::size_t w) {
    std::vector<std::size_t> fwd(h * w * c);
    for (std::size_t p = 0; p < h * w; ++p) {
        for (std::size_t ch = 0; ch < c; ++ch) fwd[p * c + ch] = ch * h * w + p;
    }
    return permute(t, img, std::move(fwd));
}

}  // namespace splatcurve
