// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "trimodal/rng.hpp"
#include "trimodal/tape.hpp"

namespace trimodal {

// Differentiable tensor operations. Each records its backward rule on the
// tape of its inputs. All are deterministic on identical inputs; log() is the
// one documented saturation (clamped below at kLogFloor).

inline constexpr double kLogFloor = 1e-12;

// Elementwise, same shape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

Var neg(Var a);
Var add_scalar(Var a, double s);
Var mul_scalar(Var a, double s);

Var exp(Var a);
Var log(Var a);  // log(max(x, kLogFloor)); gradient 0 in the clamped region
Var relu(Var a);
Var gelu(Var a);  // exact erf form
Var sigmoid(Var a);
Var tanh(Var a);
Var pow_int(Var a, int k);       // k >= 1
Var acos_clamped(Var a);         // input clamped to [-1, 1]; gradient 0 at the clamp
Var cos(Var a);

// Reductions and shape.
Var sum_all(Var a);   // scalar
Var mean_all(Var a);  // scalar
Var mean_axis(Var x, std::size_t axis);      // rank-2, reduces the given axis
Var variance_axis(Var x, std::size_t axis);  // population variance
Var l2_norm(Var a);                          // scalar Euclidean norm of all elements
Var matmul(Var a, Var b);
Var transpose(Var a);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var softmax(Var x, std::size_t axis);  // max-subtracted; slices sum to 1
Var logsumexp_rows(Var x);             // [n x m] -> [n], max-subtracted
Var linear(Var x, Var w, Var b);       // x[n x p] * w[p x q] + b[q]
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);  // rowwise
Var sum_pool_cols(Var x, std::size_t window);  // non-overlapping windows along features
Var mean_rows(Var x);                          // [n x d] -> [d]
Var broadcast_row(Var row, std::size_t n);     // [d] -> [n x d]

/// Row normalization policies. kZeroToZero maps a zero row to zero (and
/// passes no gradient through it); kEpsAdd divides by (norm + 1e-12).
enum class NormalizeMode { kZeroToZero, kEpsAdd };
Var normalize_rows(Var x, NormalizeMode mode);
Var normalize_cols(Var x, NormalizeMode mode);

/// Gradient reversal: forward identity, backward multiplies by -lambda.
Var grl(Var x, double lambda);

/// Inverted dropout with keep-prob 1-rate; identity when rate == 0.
Var dropout(Var x, double rate, Rng& rng);

/// Tape constant (a leaf that is never treated as a trainable parameter).
Var constant(Tape& tape, Tensor value);

}  // namespace trimodal
