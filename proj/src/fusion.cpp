// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/fusion.hpp"

#include <cmath>

#include "trimodal/errors.hpp"

namespace trimodal {

Var cross_attention(Tape& tape, Var text_queries, Var keys_values,
                    std::optional<std::size_t> key_valid_len) {
    const Tensor& q = text_queries.val();
    const Tensor& kv = keys_values.val();
    if (q.rank() != 2 || kv.rank() != 2 || q.cols() != kv.cols()) {
        throw DimensionError("cross_attention: width mismatch " + q.shape_str() + " vs " +
                             kv.shape_str());
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Var logits = mul_scalar(matmul(text_queries, transpose(keys_values)), scale);
    if (key_valid_len.has_value() && *key_valid_len < kv.rows()) {
        Tensor mask = Tensor::zeros({q.rows(), kv.rows()});
        for (std::size_t r = 0; r < q.rows(); ++r)
            for (std::size_t c = *key_valid_len; c < kv.rows(); ++c) mask.at(r, c) = -1e9;
        logits = add(logits, constant(tape, mask));
    }
    Var weights = softmax(logits, 1);
    return matmul(weights, keys_values);
}

FbpGate::FbpGate(std::string prefix, std::size_t d_model, std::size_t d_fbp,
                 std::size_t pool_window, ParamStore& store, Rng& rng)
    : prefix_(std::move(prefix)), d_model_(d_model), d_fbp_(d_fbp), pool_window_(pool_window) {
    if (d_fbp_ == 0 || pool_window_ == 0) {
        throw ConfigError("FbpGate: d_fbp and pool window must be >= 1");
    }
    std::size_t wide = d_fbp_ * pool_window_;
    store.add_weight(prefix_ + ".query_proj", d_model_, wide, rng);
    store.add_weight(prefix_ + ".key_proj", d_model_, wide, rng);
    store.add_weight(prefix_ + ".norm_proj", d_fbp_, d_model_, rng);
}

Var FbpGate::forward(Tape& tape, const VarMap& vars, Var guide_primary, Var guide_other,
                     bool squash) const {
    const Tensor& a = guide_primary.val();
    const Tensor& b = guide_other.val();
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != d_model_ || b.cols() != d_model_ ||
        a.rows() != b.rows()) {
        throw DimensionError("FbpGate: guides must share shape, got " + a.shape_str() + " vs " +
                             b.shape_str());
    }
    (void)tape;
    Var projected = mul(matmul(guide_primary, vars.at(prefix_ + ".query_proj")),
                        matmul(guide_other, vars.at(prefix_ + ".key_proj")));
    Var pooled = sum_pool_cols(projected, pool_window_);
    Var normalized = normalize_rows(pooled, NormalizeMode::kZeroToZero);
    Var signal = matmul(normalized, vars.at(prefix_ + ".norm_proj"));
    return squash ? sigmoid(signal) : signal;
}

Var fuse(Var gate_audio, Var attended_audio, Var gate_video, Var attended_video) {
    for (const Var* v : {&gate_audio, &attended_audio, &gate_video, &attended_video}) {
        if (v->val().shape != gate_audio.val().shape) {
            throw DimensionError("fuse: all inputs must share shape, got " +
                                 v->val().shape_str() + " vs " + gate_audio.val().shape_str());
        }
    }
    return concat_cols({mul(gate_audio, attended_audio), mul(gate_video, attended_video)});
}

PredictionHead::PredictionHead(std::string prefix, std::size_t d_in, std::size_t d_hidden,
                               std::size_t n_outputs, ParamStore& store, Rng& rng)
    : prefix_(std::move(prefix)) {
    store.add_weight(prefix_ + ".w1", d_in, d_hidden, rng);
    store.add_zeros(prefix_ + ".b1", {d_hidden});
    store.add_weight(prefix_ + ".w2", d_hidden, n_outputs, rng);
    store.add_zeros(prefix_ + ".b2", {n_outputs});
}

Var PredictionHead::forward(Tape& tape, const VarMap& vars, Var fused,
                            std::size_t valid_len) const {
    const Tensor& x = fused.val();
    if (valid_len == 0 || valid_len > x.rows()) {
        throw ContractError(prefix_ + ": valid_len out of range");
    }
    Var pooled = mean_rows(slice_rows(fused, 0, valid_len));
    Var row = broadcast_row(pooled, 1);
    Var hidden = gelu(linear(row, vars.at(prefix_ + ".w1"), vars.at(prefix_ + ".b1")));
    (void)tape;
    return linear(hidden, vars.at(prefix_ + ".w2"), vars.at(prefix_ + ".b2"));
}

Var total_loss(Tape& tape, Var task, Var consistency, Var temporal, Var domain,
               double w_consistency, double w_temporal, double w_domain,
               TotalLossBreakdown* breakdown) {
    for (const Var* v : {&task, &consistency, &temporal, &domain}) {
        if (!v->val().is_scalar()) {
            throw ContractError("total_loss: components must be scalars");
        }
    }
    (void)tape;
    Var total = add(task, mul_scalar(consistency, w_consistency));
    total = add(total, mul_scalar(temporal, w_temporal));
    total = add(total, mul_scalar(domain, w_domain));
    if (breakdown != nullptr) {
        breakdown->task = task.val().data[0];
        breakdown->consistency = consistency.val().data[0];
        breakdown->temporal = temporal.val().data[0];
        breakdown->domain = domain.val().data[0];
        breakdown->w_consistency = w_consistency;
        breakdown->w_temporal = w_temporal;
        breakdown->w_domain = w_domain;
        breakdown->total = total.val().data[0];
    }
    return total;
}

}  // namespace trimodal
