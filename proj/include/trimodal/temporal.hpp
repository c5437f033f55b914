// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "trimodal/ops.hpp"

namespace trimodal {

/// How a frame representation becomes a probability distribution before the
/// divergence; kSoftmax normalizes the feature vector directly, while
/// kGaussianProxy fits diagonal Gaussians over feature groups and discretizes
/// them on a fixed grid (exploration mode, not the default).
struct TemporalConfig {
    enum class Mode { kSoftmax, kGaussianProxy };
    Mode mode = Mode::kSoftmax;
    std::size_t proxy_groups = 4;     // feature groups for the Gaussian proxy
    std::size_t proxy_grid_bins = 16; // grid points per group
    double proxy_grid_span = 3.0;     // grid covers [-span, span]

    void validate() const;
};

/// Softmax over the feature axis of one frame (or of every row of a frame
/// stack): nonnegative, sums to 1.
Var to_distribution(Tape& tape, Var frames);

/// Jensen-Shannon divergence between two distribution vectors, natural log,
/// with 0*log(0/x) taken as 0. Bounded by ln 2.
Var jsd(Tape& tape, Var p, Var q);

/// Mean JSD between adjacent frame distributions over the valid prefix:
/// (1/(n-1)) * sum_i JSD(dist(R_i), dist(R_{i+1})). A clip with fewer than
/// two valid frames cannot be constrained; the loss is 0 and *degenerate is
/// set when provided.
Var temporal_invariance_loss(Tape& tape, Var frames, std::size_t valid_len,
                             const TemporalConfig& cfg = {}, bool* degenerate = nullptr);

}  // namespace trimodal
