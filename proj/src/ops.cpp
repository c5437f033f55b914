// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/ops.hpp"

#include <algorithm>
#include <cmath>

#include "trimodal/errors.hpp"

namespace trimodal {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void require_same_tape(Var a, Var b, const char* op) {
    if (a.tape == nullptr || b.tape == nullptr || a.tape != b.tape) {
        throw ContractError(std::string(op) + ": operands must live on the same tape");
    }
}

void require_same_shape(Var a, Var b, const char* op) {
    if (a.val().shape != b.val().shape) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.val().shape_str() + " vs " +
                             b.val().shape_str());
    }
}

void require_rank2(Var a, const char* op) {
    if (a.val().rank() != 2) {
        throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " + a.val().shape_str());
    }
}

// C[m x n] += A[m x k] * B[k x n], all row-major.
void mm_nn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            double av = ai[l];
            const double* bl = b + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
}

// C[m x n] += A[m x k] * B[n x k]^T (row-dot-row).
void mm_nt_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
            ci[j] += s;
        }
    }
}

// C[m x n] += A[k x m]^T * B[k x n].
void mm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
    for (std::size_t l = 0; l < k; ++l) {
        const double* al = a + l * m;
        const double* bl = b + l * n;
        for (std::size_t i = 0; i < m; ++i) {
            double av = al[i];
            double* ci = c + i * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
}

// Shared plumbing for unary elementwise ops: y = fwd(x), dx += dfn(x, y) * dy.
template <typename Fwd, typename Dfn>
Var unary_elementwise(Var a, Fwd fwd, Dfn dfn) {
    if (!a.valid()) throw ContractError("elementwise op on invalid var");
    const Tensor& x = a.val();
    Tensor out = Tensor::zeros(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = fwd(x.data[i]);
    std::uint32_t aid = a.id;
    return a.tape->emit(std::move(out), [aid, dfn](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& x = t.value_of(aid);
        const Tensor& y = t.value_of(self);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += dfn(x.data[i], y.data[i]) * g.data[i];
        }
    });
}

}  // namespace

Var constant(Tape& tape, Tensor value) { return tape.leaf(std::move(value)); }

Var add(Var a, Var b) {
    require_same_tape(a, b, "add");
    require_same_shape(a, b, "add");
    const Tensor& x = a.val();
    const Tensor& y = b.val();
    Tensor out = Tensor::zeros(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] + y.data[i];
    std::uint32_t aid = a.id, bid = b.id;
    return a.tape->emit(std::move(out), [aid, bid](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        Tensor& gb = t.grad_of(bid);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    });
}

Var sub(Var a, Var b) {
    require_same_tape(a, b, "sub");
    require_same_shape(a, b, "sub");
    const Tensor& x = a.val();
    const Tensor& y = b.val();
    Tensor out = Tensor::zeros(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] - y.data[i];
    std::uint32_t aid = a.id, bid = b.id;
    return a.tape->emit(std::move(out), [aid, bid](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        Tensor& gb = t.grad_of(bid);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] -= g.data[i];
        }
    });
}

Var mul(Var a, Var b) {
    require_same_tape(a, b, "mul");
    require_same_shape(a, b, "mul");
    const Tensor& x = a.val();
    const Tensor& y = b.val();
    Tensor out = Tensor::zeros(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] * y.data[i];
    std::uint32_t aid = a.id, bid = b.id;
    return a.tape->emit(std::move(out), [aid, bid](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& x = t.value_of(aid);
        const Tensor& y = t.value_of(bid);
        Tensor& ga = t.grad_of(aid);
        Tensor& gb = t.grad_of(bid);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i] * y.data[i];
            gb.data[i] += g.data[i] * x.data[i];
        }
    });
}

Var div(Var a, Var b) {
    require_same_tape(a, b, "div");
    require_same_shape(a, b, "div");
    const Tensor& x = a.val();
    const Tensor& y = b.val();
    Tensor out = Tensor::zeros(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] / y.data[i];
    std::uint32_t aid = a.id, bid = b.id;
    return a.tape->emit(std::move(out), [aid, bid](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& x = t.value_of(aid);
        const Tensor& y = t.value_of(bid);
        Tensor& ga = t.grad_of(aid);
        Tensor& gb = t.grad_of(bid);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i] / y.data[i];
            gb.data[i] -= g.data[i] * x.data[i] / (y.data[i] * y.data[i]);
        }
    });
}

Var neg(Var a) {
    return unary_elementwise(
        a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var add_scalar(Var a, double s) {
    return unary_elementwise(
        a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var mul_scalar(Var a, double s) {
    return unary_elementwise(
        a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Var exp(Var a) {
    return unary_elementwise(
        a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
    return unary_elementwise(
        a, [](double x) { return std::log(std::max(x, kLogFloor)); },
        [](double x, double) { return x > kLogFloor ? 1.0 / x : 0.0; });
}

Var relu(Var a) {
    return unary_elementwise(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var gelu(Var a) {
    return unary_elementwise(
        a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
        [](double x, double) {
            double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            return cdf + x * pdf;
        });
}

Var sigmoid(Var a) {
    return unary_elementwise(
        a,
        [](double x) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
    return unary_elementwise(
        a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var pow_int(Var a, int k) {
    if (k < 1) throw ContractError("pow_int: exponent must be >= 1");
    return unary_elementwise(
        a,
        [k](double x) {
            double r = 1.0;
            for (int i = 0; i < k; ++i) r *= x;
            return r;
        },
        [k](double x, double) {
            double r = static_cast<double>(k);
            for (int i = 0; i < k - 1; ++i) r *= x;
            return r;
        });
}

Var acos_clamped(Var a) {
    return unary_elementwise(
        a, [](double x) { return std::acos(std::clamp(x, -1.0, 1.0)); },
        [](double x, double) {
            if (x <= -1.0 || x >= 1.0) return 0.0;  // saturated at the clamp
            return -1.0 / std::sqrt(1.0 - x * x);
        });
}

Var cos(Var a) {
    return unary_elementwise(
        a, [](double x) { return std::cos(x); }, [](double x, double) { return -std::sin(x); });
}

Var sum_all(Var a) {
    const Tensor& x = a.val();
    double s = 0.0;
    for (double v : x.data) s += v;
    std::uint32_t aid = a.id;
    return a.tape->emit(Tensor::scalar(s), [aid](Tape& t, std::uint32_t self) {
        double g = t.grad_of(self).data[0];
        Tensor& ga = t.grad_of(aid);
        for (double& v : ga.data) v += g;
    });
}

Var mean_all(Var a) {
    const Tensor& x = a.val();
    double s = 0.0;
    for (double v : x.data) s += v;
    double inv = 1.0 / static_cast<double>(x.numel());
    std::uint32_t aid = a.id;
    return a.tape->emit(Tensor::scalar(s * inv), [aid, inv](Tape& t, std::uint32_t self) {
        double g = t.grad_of(self).data[0] * inv;
        Tensor& ga = t.grad_of(aid);
        for (double& v : ga.data) v += g;
    });
}

Var mean_axis(Var a, std::size_t axis) {
    require_rank2(a, "mean_axis");
    if (axis > 1) throw DimensionError("mean_axis: axis out of range for rank-2 tensor");
    const Tensor& x = a.val();
    std::size_t n = x.rows(), d = x.cols();
    std::uint32_t aid = a.id;
    if (axis == 0) {
        Tensor out = Tensor::zeros({d});
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) out.data[c] += x.at(r, c);
        double inv = 1.0 / static_cast<double>(n);
        for (double& v : out.data) v *= inv;
        return a.tape->emit(std::move(out), [aid, n, d, inv](Tape& t, std::uint32_t self) {
            const Tensor& g = t.grad_of(self);
            Tensor& ga = t.grad_of(aid);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < d; ++c) ga.data[r * d + c] += g.data[c] * inv;
        });
    }
    Tensor out = Tensor::zeros({n});
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += x.at(r, c);
        out.data[r] = s / static_cast<double>(d);
    }
    double inv = 1.0 / static_cast<double>(d);
    return a.tape->emit(std::move(out), [aid, n, d, inv](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) ga.data[r * d + c] += g.data[r] * inv;
    });
}

Var variance_axis(Var a, std::size_t axis) {
    require_rank2(a, "variance_axis");
    if (axis > 1) throw DimensionError("variance_axis: axis out of range for rank-2 tensor");
    const Tensor& x = a.val();
    std::size_t n = x.rows(), d = x.cols();
    std::uint32_t aid = a.id;
    if (axis == 0) {
        Tensor mean = Tensor::zeros({d});
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) mean.data[c] += x.at(r, c);
        for (double& v : mean.data) v /= static_cast<double>(n);
        Tensor out = Tensor::zeros({d});
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) {
                double dlt = x.at(r, c) - mean.data[c];
                out.data[c] += dlt * dlt;
            }
        for (double& v : out.data) v /= static_cast<double>(n);
        Tensor mean_copy = mean;
        return a.tape->emit(std::move(out),
                            [aid, n, d, mean_copy](Tape& t, std::uint32_t self) {
                                const Tensor& g = t.grad_of(self);
                                const Tensor& x = t.value_of(aid);
                                Tensor& ga = t.grad_of(aid);
                                double inv = 2.0 / static_cast<double>(n);
                                for (std::size_t r = 0; r < n; ++r)
                                    for (std::size_t c = 0; c < d; ++c)
                                        ga.data[r * d + c] +=
                                            g.data[c] * inv * (x.data[r * d + c] - mean_copy.data[c]);
                            });
    }
    Tensor mean = Tensor::zeros({n});
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += x.at(r, c);
        mean.data[r] = s / static_cast<double>(d);
    }
    Tensor out = Tensor::zeros({n});
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            double dlt = x.at(r, c) - mean.data[r];
            s += dlt * dlt;
        }
        out.data[r] = s / static_cast<double>(d);
    }
    Tensor mean_copy = mean;
    return a.tape->emit(std::move(out), [aid, n, d, mean_copy](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& x = t.value_of(aid);
        Tensor& ga = t.grad_of(aid);
        double inv = 2.0 / static_cast<double>(d);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c)
                ga.data[r * d + c] += g.data[r] * inv * (x.data[r * d + c] - mean_copy.data[r]);
    });
}

Var l2_norm(Var a) {
    const Tensor& x = a.val();
    double s = 0.0;
    for (double v : x.data) s += v * v;
    double norm = std::sqrt(s);
    std::uint32_t aid = a.id;
    return a.tape->emit(Tensor::scalar(norm), [aid, norm](Tape& t, std::uint32_t self) {
        if (norm == 0.0) return;  // subgradient 0 at the origin
        double g = t.grad_of(self).data[0];
        const Tensor& x = t.value_of(aid);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t i = 0; i < x.numel(); ++i) ga.data[i] += g * x.data[i] / norm;
    });
}

Var matmul(Var a, Var b) {
    require_same_tape(a, b, "matmul");
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    const Tensor& x = a.val();
    const Tensor& y = b.val();
    if (x.cols() != y.rows()) {
        throw DimensionError("matmul: inner extents differ, " + x.shape_str() + " vs " +
                             y.shape_str());
    }
    std::size_t m = x.rows(), k = x.cols(), n = y.cols();
    Tensor out = Tensor::zeros({m, n});
    mm_nn_acc(x.data.data(), y.data.data(), out.data.data(), m, k, n);
    std::uint32_t aid = a.id, bid = b.id;
    return a.tape->emit(std::move(out), [aid, bid, m, k, n](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& x = t.value_of(aid);
        const Tensor& y = t.value_of(bid);
        // dA += dC * B^T ; dB += A^T * dC
        mm_nt_acc(g.data.data(), y.data.data(), t.grad_of(aid).data.data(), m, n, k);
        mm_tn_acc(x.data.data(), g.data.data(), t.grad_of(bid).data.data(), k, m, n);
    });
}

Var transpose(Var a) {
    require_rank2(a, "transpose");
    const Tensor& x = a.val();
    std::size_t n = x.rows(), d = x.cols();
    Tensor out = Tensor::zeros({d, n});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) out.data[c * n + r] = x.data[r * d + c];
    std::uint32_t aid = a.id;
    return a.tape->emit(std::move(out), [aid, n, d](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) ga.data[r * d + c] += g.data[c * n + r];
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: no inputs");
    Tape* tape = parts[0].tape;
    std::size_t d = parts[0].val().cols();
    std::size_t total = 0;
    for (Var p : parts) {
        require_rank2(p, "concat_rows");
        if (p.tape != tape) throw ContractError("concat_rows: mixed tapes");
        if (p.val().cols() != d) {
            throw DimensionError("concat_rows: column mismatch " + p.val().shape_str());
        }
        total += p.val().rows();
    }
    Tensor out = Tensor::zeros({total, d});
    std::size_t row = 0;
    std::vector<std::uint32_t> ids;
    std::vector<std::size_t> offsets;
    for (Var p : parts) {
        const Tensor& x = p.val();
        std::copy(x.data.begin(), x.data.end(), out.data.begin() + row * d);
        ids.push_back(p.id);
        offsets.push_back(row);
        row += x.rows();
    }
    return tape->emit(std::move(out), [ids, offsets, d](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        for (std::size_t p = 0; p < ids.size(); ++p) {
            Tensor& gp = t.grad_of(ids[p]);
            std::size_t base = offsets[p] * d;
            for (std::size_t i = 0; i < gp.numel(); ++i) gp.data[i] += g.data[base + i];
        }
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: no inputs");
    Tape* tape = parts[0].tape;
    std::size_t n = parts[0].val().rows();
    std::size_t total = 0;
    for (Var p : parts) {
        require_rank2(p, "concat_cols");
        if (p.tape != tape) throw ContractError("concat_cols: mixed tapes");
        if (p.val().rows() != n) {
            throw DimensionError("concat_cols: row mismatch " + p.val().shape_str());
        }
        total += p.val().cols();
    }
    Tensor out = Tensor::zeros({n, total});
    std::size_t col = 0;
    std::vector<std::uint32_t> ids;
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> widths;
    for (Var p : parts) {
        const Tensor& x = p.val();
        std::size_t w = x.cols();
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < w; ++c) out.data[r * total + col + c] = x.data[r * w + c];
        ids.push_back(p.id);
        offsets.push_back(col);
        widths.push_back(w);
        col += w;
    }
    return tape->emit(std::move(out), [ids, offsets, widths, n, total](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        for (std::size_t p = 0; p < ids.size(); ++p) {
            Tensor& gp = t.grad_of(ids[p]);
            std::size_t w = widths[p];
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < w; ++c)
                    gp.data[r * w + c] += g.data[r * total + offsets[p] + c];
        }
    });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
    require_rank2(a, "slice_rows");
    const Tensor& x = a.val();
    if (begin >= end || end > x.rows()) {
        throw DimensionError("slice_rows: range [" + std::to_string(begin) + "," +
                             std::to_string(end) + ") invalid for " + x.shape_str());
    }
    std::size_t d = x.cols();
    Tensor out = Tensor::zeros({end - begin, d});
    std::copy(x.data.begin() + begin * d, x.data.begin() + end * d, out.data.begin());
    std::uint32_t aid = a.id;
    return a.tape->emit(std::move(out), [aid, begin, d](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        std::size_t base = begin * d;
        for (std::size_t i = 0; i < g.numel(); ++i) ga.data[base + i] += g.data[i];
    });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
    require_rank2(a, "slice_cols");
    const Tensor& x = a.val();
    if (begin >= end || end > x.cols()) {
        throw DimensionError("slice_cols: range [" + std::to_string(begin) + "," +
                             std::to_string(end) + ") invalid for " + x.shape_str());
    }
    std::size_t n = x.rows(), d = x.cols(), w = end - begin;
    Tensor out = Tensor::zeros({n, w});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < w; ++c) out.data[r * w + c] = x.data[r * d + begin + c];
    std::uint32_t aid = a.id;
    return a.tape->emit(std::move(out), [aid, begin, n, d, w](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < w; ++c) ga.data[r * d + begin + c] += g.data[r * w + c];
    });
}

namespace {

// Softmax over contiguous slices: for axis-1 rows the slice is contiguous; the
// axis-0 case walks columns with a stride. Unified via (outer, stride, len).
void softmax_slices(const double* x, double* y, std::size_t count, std::size_t len,
                    std::size_t outer_stride, std::size_t inner_stride) {
    for (std::size_t s = 0; s < count; ++s) {
        const double* xs = x + s * outer_stride;
        double* ys = y + s * outer_stride;
        double mx = xs[0];
        for (std::size_t i = 1; i < len; ++i) mx = std::max(mx, xs[i * inner_stride]);
        double denom = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            double e = std::exp(xs[i * inner_stride] - mx);
            ys[i * inner_stride] = e;
            denom += e;
        }
        for (std::size_t i = 0; i < len; ++i) ys[i * inner_stride] /= denom;
    }
}

void softmax_backward_slices(const double* y, const double* gy, double* gx, std::size_t count,
                             std::size_t len, std::size_t outer_stride, std::size_t inner_stride) {
    for (std::size_t s = 0; s < count; ++s) {
        const double* ys = y + s * outer_stride;
        const double* gs = gy + s * outer_stride;
        double* os = gx + s * outer_stride;
        double dot = 0.0;
        for (std::size_t i = 0; i < len; ++i) dot += ys[i * inner_stride] * gs[i * inner_stride];
        for (std::size_t i = 0; i < len; ++i)
            os[i * inner_stride] += ys[i * inner_stride] * (gs[i * inner_stride] - dot);
    }
}

}  // namespace

Var softmax(Var a, std::size_t axis) {
    const Tensor& x = a.val();
    std::uint32_t aid = a.id;
    if (x.rank() == 1 || x.rank() == 0) {
        if (axis != 0) throw DimensionError("softmax: axis out of range for rank-1 tensor");
        Tensor out = Tensor::zeros(x.shape);
        softmax_slices(x.data.data(), out.data.data(), 1, x.numel(), 0, 1);
        std::size_t len = x.numel();
        return a.tape->emit(std::move(out), [aid, len](Tape& t, std::uint32_t self) {
            softmax_backward_slices(t.value_of(self).data.data(), t.grad_of(self).data.data(),
                                    t.grad_of(aid).data.data(), 1, len, 0, 1);
        });
    }
    require_rank2(a, "softmax");
    if (axis > 1) throw DimensionError("softmax: axis out of range for rank-2 tensor");
    std::size_t n = x.rows(), d = x.cols();
    Tensor out = Tensor::zeros(x.shape);
    if (axis == 1) {
        softmax_slices(x.data.data(), out.data.data(), n, d, d, 1);
        return a.tape->emit(std::move(out), [aid, n, d](Tape& t, std::uint32_t self) {
            softmax_backward_slices(t.value_of(self).data.data(), t.grad_of(self).data.data(),
                                    t.grad_of(aid).data.data(), n, d, d, 1);
        });
    }
    softmax_slices(x.data.data(), out.data.data(), d, n, 1, d);
    return a.tape->emit(std::move(out), [aid, n, d](Tape& t, std::uint32_t self) {
        softmax_backward_slices(t.value_of(self).data.data(), t.grad_of(self).data.data(),
                                t.grad_of(aid).data.data(), d, n, 1, d);
    });
}

Var logsumexp_rows(Var a) {
    require_rank2(a, "logsumexp_rows");
    const Tensor& x = a.val();
    std::size_t n = x.rows(), d = x.cols();
    Tensor out = Tensor::zeros({n});
    for (std::size_t r = 0; r < n; ++r) {
        double mx = x.at(r, 0);
        for (std::size_t c = 1; c < d; ++c) mx = std::max(mx, x.at(r, c));
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += std::exp(x.at(r, c) - mx);
        out.data[r] = mx + std::log(s);
    }
    std::uint32_t aid = a.id;
    return a.tape->emit(std::move(out), [aid, n, d](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& x = t.value_of(aid);
        const Tensor& y = t.value_of(self);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c)
                ga.data[r * d + c] += g.data[r] * std::exp(x.data[r * d + c] - y.data[r]);
    });
}

Var linear(Var x, Var w, Var b) {
    require_same_tape(x, w, "linear");
    require_same_tape(x, b, "linear");
    require_rank2(x, "linear");
    require_rank2(w, "linear");
    const Tensor& xv = x.val();
    const Tensor& wv = w.val();
    const Tensor& bv = b.val();
    if (xv.cols() != wv.rows()) {
        throw DimensionError("linear: input width " + xv.shape_str() + " vs weight " +
                             wv.shape_str());
    }
    if (bv.rank() != 1 || bv.shape[0] != wv.cols()) {
        throw DimensionError("linear: bias shape " + bv.shape_str() + " vs weight " +
                             wv.shape_str());
    }
    std::size_t m = xv.rows(), k = xv.cols(), n = wv.cols();
    Tensor out = Tensor::zeros({m, n});
    mm_nn_acc(xv.data.data(), wv.data.data(), out.data.data(), m, k, n);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) out.data[r * n + c] += bv.data[c];
    std::uint32_t xid = x.id, wid = w.id, bid = b.id;
    return x.tape->emit(std::move(out), [xid, wid, bid, m, k, n](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& xv = t.value_of(xid);
        const Tensor& wv = t.value_of(wid);
        mm_nt_acc(g.data.data(), wv.data.data(), t.grad_of(xid).data.data(), m, n, k);
        mm_tn_acc(xv.data.data(), g.data.data(), t.grad_of(wid).data.data(), k, m, n);
        Tensor& gb = t.grad_of(bid);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) gb.data[c] += g.data[r * n + c];
    });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
    require_same_tape(x, gain, "layer_norm");
    require_same_tape(x, bias, "layer_norm");
    require_rank2(x, "layer_norm");
    const Tensor& xv = x.val();
    std::size_t n = xv.rows(), d = xv.cols();
    const Tensor& gv = gain.val();
    const Tensor& bv = bias.val();
    if (gv.numel() != d || bv.numel() != d) {
        throw DimensionError("layer_norm: gain/bias must have width " + std::to_string(d));
    }
    Tensor out = Tensor::zeros({n, d});
    Tensor xhat = Tensor::zeros({n, d});
    std::vector<double> inv_std(n);
    for (std::size_t r = 0; r < n; ++r) {
        double mean = 0.0;
        for (std::size_t c = 0; c < d; ++c) mean += xv.at(r, c);
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            double dl = xv.at(r, c) - mean;
            var += dl * dl;
        }
        var /= static_cast<double>(d);
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[r] = is;
        for (std::size_t c = 0; c < d; ++c) {
            double h = (xv.at(r, c) - mean) * is;
            xhat.data[r * d + c] = h;
            out.data[r * d + c] = gv.data[c] * h + bv.data[c];
        }
    }
    std::uint32_t xid = x.id, gid = gain.id, bid = bias.id;
    return x.tape->emit(std::move(out), [xid, gid, bid, n, d, xhat, inv_std](Tape& t,
                                                                             std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        const Tensor& gv = t.value_of(gid);
        Tensor& gx = t.grad_of(xid);
        Tensor& gg = t.grad_of(gid);
        Tensor& gb = t.grad_of(bid);
        double invd = 1.0 / static_cast<double>(d);
        for (std::size_t r = 0; r < n; ++r) {
            double sum_dh = 0.0, sum_dh_h = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                double dy = g.data[r * d + c];
                double h = xhat.data[r * d + c];
                gg.data[c] += dy * h;
                gb.data[c] += dy;
                double dh = dy * gv.data[c];
                sum_dh += dh;
                sum_dh_h += dh * h;
            }
            for (std::size_t c = 0; c < d; ++c) {
                double dh = g.data[r * d + c] * gv.data[c];
                double h = xhat.data[r * d + c];
                gx.data[r * d + c] +=
                    inv_std[r] * (dh - invd * sum_dh - h * invd * sum_dh_h);
            }
        }
    });
}

Var sum_pool_cols(Var a, std::size_t window) {
    require_rank2(a, "sum_pool_cols");
    const Tensor& x = a.val();
    std::size_t n = x.rows(), d = x.cols();
    if (window < 1) throw ConfigError("sum_pool_cols: window must be >= 1");
    if (d % window != 0) {
        throw ConfigError("sum_pool_cols: width " + std::to_string(d) +
                          " not divisible by window " + std::to_string(window));
    }
    std::size_t w = d / window;
    Tensor out = Tensor::zeros({n, w});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < w; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < window; ++i) s += x.data[r * d + j * window + i];
            out.data[r * w + j] = s;
        }
    std::uint32_t aid = a.id;
    return a.tape->emit(std::move(out), [aid, n, d, w, window](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < w; ++j)
                for (std::size_t i = 0; i < window; ++i)
                    ga.data[r * d + j * window + i] += g.data[r * w + j];
    });
}

Var mean_rows(Var x) { return mean_axis(x, 0); }

Var broadcast_row(Var row, std::size_t n) {
    const Tensor& x = row.val();
    if (x.rank() != 1 && !(x.rank() == 2 && x.rows() == 1)) {
        throw DimensionError("broadcast_row: expected a vector, got " + x.shape_str());
    }
    std::size_t d = x.numel();
    Tensor out = Tensor::zeros({n, d});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) out.data[r * d + c] = x.data[c];
    std::uint32_t aid = row.id;
    return row.tape->emit(std::move(out), [aid, n, d](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) ga.data[c] += g.data[r * d + c];
    });
}

namespace {

Var normalize_lines(Var a, NormalizeMode mode, bool rows) {
    require_rank2(a, rows ? "normalize_rows" : "normalize_cols");
    const Tensor& x = a.val();
    std::size_t n = x.rows(), d = x.cols();
    std::size_t count = rows ? n : d;
    std::size_t len = rows ? d : n;
    auto index = [n, d, rows](std::size_t line, std::size_t i) {
        return rows ? line * d + i : i * d + line;
    };
    constexpr double kEps = 1e-12;
    Tensor out = Tensor::zeros({n, d});
    std::vector<double> norms(count);
    for (std::size_t l = 0; l < count; ++l) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            double v = x.data[index(l, i)];
            s += v * v;
        }
        double norm = std::sqrt(s);
        norms[l] = norm;
        double denom;
        if (mode == NormalizeMode::kEpsAdd) {
            denom = norm + kEps;
        } else {
            if (norm == 0.0) continue;  // zero line stays zero
            denom = norm;
        }
        for (std::size_t i = 0; i < len; ++i) out.data[index(l, i)] = x.data[index(l, i)] / denom;
    }
    std::uint32_t aid = a.id;
    return a.tape->emit(std::move(out),
                        [aid, count, len, index, norms, mode](Tape& t, std::uint32_t self) {
                            const Tensor& g = t.grad_of(self);
                            const Tensor& x = t.value_of(aid);
                            Tensor& ga = t.grad_of(aid);
                            constexpr double kEps = 1e-12;
                            for (std::size_t l = 0; l < count; ++l) {
                                double norm = norms[l];
                                if (norm == 0.0) continue;  // saturated: no gradient
                                double denom =
                                    (mode == NormalizeMode::kEpsAdd) ? norm + kEps : norm;
                                double dot = 0.0;
                                for (std::size_t i = 0; i < len; ++i)
                                    dot += g.data[index(l, i)] * x.data[index(l, i)];
                                // y = x / denom(norm): dy/dx = I/denom - x x^T / (norm denom^2)
                                double scale = dot / (norm * denom * denom);
                                for (std::size_t i = 0; i < len; ++i) {
                                    ga.data[index(l, i)] +=
                                        g.data[index(l, i)] / denom - x.data[index(l, i)] * scale;
                                }
                            }
                        });
}

}  // namespace

Var normalize_rows(Var x, NormalizeMode mode) { return normalize_lines(x, mode, true); }
Var normalize_cols(Var x, NormalizeMode mode) { return normalize_lines(x, mode, false); }

Var grl(Var a, double lambda) {
    if (lambda < 0.0) throw ContractError("grl: lambda must be >= 0");
    Tensor out = a.val();  // forward is the identity, bit-exact
    std::uint32_t aid = a.id;
    return a.tape->emit(std::move(out), [aid, lambda](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t i = 0; i < g.numel(); ++i) ga.data[i] += -lambda * g.data[i];
    });
}

Var dropout(Var a, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout: rate must be in [0, 1)");
    if (rate == 0.0) return a;
    const Tensor& x = a.val();
    Tensor mask = Tensor::zeros(x.shape);
    double keep = 1.0 - rate;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        mask.data[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
    }
    Tensor out = Tensor::zeros(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] * mask.data[i];
    std::uint32_t aid = a.id;
    return a.tape->emit(std::move(out), [aid, mask](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad_of(self);
        Tensor& ga = t.grad_of(aid);
        for (std::size_t i = 0; i < g.numel(); ++i) ga.data[i] += g.data[i] * mask.data[i];
    });
}

}  // namespace trimodal
