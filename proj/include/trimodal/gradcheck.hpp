// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "trimodal/params.hpp"
#include "trimodal/tape.hpp"

namespace trimodal {

/// Per-parameter outcome of a finite-difference comparison.
struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> per_param;
    double eps = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    double max_rel_err() const;
    const GradCheckEntry* worst() const;
    std::string summary() const;
};

/// A differentiable scalar function of the leased parameters.
using ScalarFn = std::function<Var(Tape&, VarMap&)>;

/// Central-difference gradient verification: perturbs every coordinate of
/// every parameter by +/-eps, rebuilds the forward pass, and compares the
/// quotient against the tape gradient. Relative error per coordinate is
/// |a - n| / max(|a|, |n|, 1e-8). The function must be deterministic; two
/// forward passes that disagree bit-for-bit raise ContractError.
GradCheckReport grad_check(const ScalarFn& f, ParamStore& params, double eps = 1e-5,
                           double tolerance = 1e-4);

}  // namespace trimodal
