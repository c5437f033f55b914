// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/temporal.hpp"

#include <cmath>

#include "trimodal/errors.hpp"

namespace trimodal {

void TemporalConfig::validate() const {
    if (proxy_groups == 0 || proxy_grid_bins < 2 || proxy_grid_span <= 0.0) {
        throw ConfigError("TemporalConfig: proxy settings out of range");
    }
}

Var to_distribution(Tape& tape, Var frames) {
    (void)tape;
    const Tensor& x = frames.val();
    if (x.rank() == 1) {
        if (x.numel() < 2) throw ContractError("to_distribution: need at least 2 features");
        return softmax(frames, 0);
    }
    if (x.rank() == 2) {
        if (x.cols() < 2) throw ContractError("to_distribution: need at least 2 features");
        return softmax(frames, 1);
    }
    throw DimensionError("to_distribution: expected a frame vector or frame stack, got " +
                         x.shape_str());
}

Var jsd(Tape& tape, Var p, Var q) {
    const Tensor& pv = p.val();
    const Tensor& qv = q.val();
    if (pv.shape != qv.shape) {
        throw DimensionError("jsd: dimension mismatch " + pv.shape_str() + " vs " + qv.shape_str());
    }
    Var mid = mul_scalar(add(p, q), 0.5);
    Var log_mid = log(mid);
    // p*(log p - log m): the log floor turns 0*log(0/m) into an exact 0.
    Var left = mul(p, sub(log(p), log_mid));
    Var right = mul(q, sub(log(q), log_mid));
    (void)tape;
    return mul_scalar(add(sum_all(left), sum_all(right)), 0.5);
}

namespace {

// Replicate a length-1 vector to a given length (keeps gradients).
Var broadcast_to_len(Var scalar_vec, std::size_t len) {
    Var wide = broadcast_row(scalar_vec, len);  // len x 1
    return mean_axis(wide, 1);                  // [len]
}

// Fit a diagonal Gaussian per feature group from the group's mean/variance,
// evaluate its density on a fixed grid, and renormalize the concatenated
// bins into one categorical distribution.
Var gaussian_proxy_distribution(Tape& tape, Var frame_row, const TemporalConfig& cfg) {
    const std::size_t d = frame_row.val().numel();
    std::size_t groups = std::min(cfg.proxy_groups, d);
    std::size_t per = d / groups;
    std::vector<Var> bins;
    for (std::size_t g = 0; g < groups; ++g) {
        std::size_t lo = g * per;
        std::size_t hi = (g + 1 == groups) ? d : lo + per;
        Var row = broadcast_row(frame_row, 1);
        Var part = slice_cols(row, lo, hi);
        Var mean = mean_axis(part, 1);                            // [1]
        Var var = add_scalar(variance_axis(part, 1), 1e-3);       // [1], floored
        Tensor grid = Tensor::zeros({cfg.proxy_grid_bins});
        for (std::size_t i = 0; i < cfg.proxy_grid_bins; ++i) {
            grid.data[i] = -cfg.proxy_grid_span +
                           2.0 * cfg.proxy_grid_span * static_cast<double>(i) /
                               static_cast<double>(cfg.proxy_grid_bins - 1);
        }
        Var centered = sub(constant(tape, grid), broadcast_to_len(mean, cfg.proxy_grid_bins));
        Var spread = broadcast_to_len(var, cfg.proxy_grid_bins);
        Var density = exp(div(mul_scalar(mul(centered, centered), -0.5), spread));
        bins.push_back(broadcast_row(density, 1));
    }
    Var all = concat_cols(bins);
    Var total = sum_all(all);
    Var denom = broadcast_row(total, 1);  // 1 x 1
    // Divide every bin by the grand total.
    std::size_t width = all.val().cols();
    std::vector<Var> denom_cols(width, denom);
    Var denom_mat = concat_cols(denom_cols);
    Var normalized = div(all, denom_mat);
    return mean_axis(transpose(normalized), 1);  // back to a vector [width]
}

}  // namespace

Var temporal_invariance_loss(Tape& tape, Var frames, std::size_t valid_len,
                             const TemporalConfig& cfg, bool* degenerate) {
    cfg.validate();
    const Tensor& x = frames.val();
    if (x.rank() != 2) {
        throw DimensionError("temporal_invariance_loss: expected a frame stack, got " +
                             x.shape_str());
    }
    if (valid_len > x.rows()) {
        throw ContractError("temporal_invariance_loss: valid_len exceeds frame count");
    }
    if (degenerate != nullptr) *degenerate = false;
    if (valid_len < 2) {
        // A single frame has no adjacent pair to constrain.
        if (degenerate != nullptr) *degenerate = true;
        return constant(tape, Tensor::scalar(0.0));
    }

    Var valid = slice_rows(frames, 0, valid_len);
    Var total = constant(tape, Tensor::scalar(0.0));
    if (cfg.mode == TemporalConfig::Mode::kSoftmax) {
        Var dists = to_distribution(tape, valid);
        for (std::size_t i = 0; i + 1 < valid_len; ++i) {
            Var p = mean_axis(slice_rows(dists, i, i + 1), 0);
            Var q = mean_axis(slice_rows(dists, i + 1, i + 2), 0);
            total = add(total, jsd(tape, p, q));
        }
    } else {
        std::vector<Var> dists;
        for (std::size_t i = 0; i < valid_len; ++i) {
            Var row = mean_axis(slice_rows(valid, i, i + 1), 0);
            dists.push_back(gaussian_proxy_distribution(tape, row, cfg));
        }
        for (std::size_t i = 0; i + 1 < valid_len; ++i) {
            total = add(total, jsd(tape, dists[i], dists[i + 1]));
        }
    }
    return mul_scalar(total, 1.0 / static_cast<double>(valid_len - 1));
}

}  // namespace trimodal
