// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "trimodal/ops.hpp"
#include "trimodal/params.hpp"

namespace trimodal {

/// Text-driven attention over another modality's sequence:
/// softmax(Q K^T / sqrt(d)) V with K = V = the other modality. Key positions
/// at or beyond key_valid_len get -1e9 logits. There are no learned
/// projections; d_k is the shared feature width.
Var cross_attention(Tape& tape, Var text_queries, Var keys_values,
                    std::optional<std::size_t> key_valid_len = std::nullopt);

/// Low-rank bilinear gate: project both guides, multiply elementwise,
/// sum-pool in non-overlapping windows along the projected features,
/// L2-normalize rows (zero rows stay zero), map back to model width, and
/// squash through a sigmoid (optional).
class FbpGate {
public:
    FbpGate(std::string prefix, std::size_t d_model, std::size_t d_fbp, std::size_t pool_window,
            ParamStore& store, Rng& rng);

    /// guide_primary is n x d; guide_other must already be time-aligned to n
    /// rows (mean-pool-broadcast upstream when lengths differ).
    Var forward(Tape& tape, const VarMap& vars, Var guide_primary, Var guide_other,
                bool squash = true) const;

    std::size_t pool_window() const { return pool_window_; }

private:
    std::string prefix_;
    std::size_t d_model_, d_fbp_, pool_window_;
};

/// Gated concatenation: concat(gate_a * F_ta, gate_v * F_tv) along features.
Var fuse(Var gate_audio, Var attended_audio, Var gate_video, Var attended_video);

/// Two-layer MLP head over the mean-pooled fused sequence. Emits a scalar in
/// regression mode or class logits otherwise.
class PredictionHead {
public:
    PredictionHead(std::string prefix, std::size_t d_in, std::size_t d_hidden,
                   std::size_t n_outputs, ParamStore& store, Rng& rng);

    /// Pools the first valid_len rows only; padded steps never contribute.
    Var forward(Tape& tape, const VarMap& vars, Var fused, std::size_t valid_len) const;

private:
    std::string prefix_;
};

/// The scalarized objective and its parts.
struct TotalLossBreakdown {
    double task = 0.0;
    double consistency = 0.0;
    double temporal = 0.0;
    double domain = 0.0;
    double w_consistency = 0.0;
    double w_temporal = 0.0;
    double w_domain = 0.0;
    double total = 0.0;
};

/// total = task + w_con * consistency + w_ti * temporal + w_dom * domain.
Var total_loss(Tape& tape, Var task, Var consistency, Var temporal, Var domain,
               double w_consistency, double w_temporal, double w_domain,
               TotalLossBreakdown* breakdown = nullptr);

}  // namespace trimodal
