// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "trimodal/ops.hpp"

namespace trimodal {

/// Central Moment Discrepancy settings: highest moment order and the support
/// bounds used for normalization.
struct CmdConfig {
    std::size_t order = 5;  // highest central-moment order
    double lo = -1.0;
    double hi = 1.0;

    void validate() const;
};

/// CMD between two sample sets (rows are samples):
///   ||E(X) - E(Y)|| / |hi-lo|  +  sum_{k=2..K} ||c_k(X) - c_k(Y)|| / |hi-lo|^k
/// where c_k is the vector of per-coordinate k-th central moments. The caller
/// is responsible for inputs actually lying in [lo, hi].
Var cmd(Tape& tape, Var x, Var y, const CmdConfig& cfg);

/// Mean CMD over the three unordered modality pairs. Inputs are squashed by
/// tanh first so the (-1, 1) support bound of the default config is a
/// guarantee rather than an assumption.
Var consistency_loss(Tape& tape, Var inv_audio, Var inv_video, Var inv_text,
                     const CmdConfig& cfg);

}  // namespace trimodal
