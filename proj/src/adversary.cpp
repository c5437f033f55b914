// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/adversary.hpp"

#include <cmath>

#include "trimodal/errors.hpp"

namespace trimodal {

void AdversaryConfig::validate() const {
    if (d_in == 0 || d_embed == 0) throw ConfigError("AdversaryConfig: widths must be >= 1");
    if (scale <= 0.0) throw ConfigError("AdversaryConfig: scale must be > 0");
    if (margin < 0.0 || margin >= 1.5707963267948966) {
        throw ConfigError("AdversaryConfig: margin must lie in [0, pi/2)");
    }
    if (grl_lambda < 0.0) throw ConfigError("AdversaryConfig: grl_lambda must be >= 0");
}

Var aam_loss(Tape& tape, Var unit_rows, Var class_dirs_unit_cols, const std::vector<int>& labels,
             double scale, double margin) {
    const Tensor& h = unit_rows.val();
    const Tensor& w = class_dirs_unit_cols.val();
    if (h.rank() != 2 || w.rank() != 2 || h.cols() != w.rows()) {
        throw DimensionError("aam_loss: embedding " + h.shape_str() + " vs class matrix " +
                             w.shape_str());
    }
    std::size_t n = h.rows();
    std::size_t classes = w.cols();
    if (labels.size() != n) throw ContractError("aam_loss: one label per row required");
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= classes) {
            throw ContractError("aam_loss: label " + std::to_string(y) + " outside [0, " +
                                std::to_string(classes) + ")");
        }
    }

    Var cosines = matmul(unit_rows, class_dirs_unit_cols);  // n x M
    Var angles = acos_clamped(cosines);

    // Add the margin to the true-class angle only, then return to cosines.
    Tensor margin_mask = Tensor::zeros({n, classes});
    for (std::size_t r = 0; r < n; ++r) margin_mask.at(r, static_cast<std::size_t>(labels[r])) = margin;
    Var shifted = add(angles, constant(tape, margin_mask));
    Var logits = mul_scalar(cos(shifted), scale);

    // -log softmax at the true class: -z_y + logsumexp(z).
    Tensor one_hot = Tensor::zeros({n, classes});
    for (std::size_t r = 0; r < n; ++r) one_hot.at(r, static_cast<std::size_t>(labels[r])) = 1.0;
    Var z_true = mean_axis(mul(logits, constant(tape, one_hot)), 1);  // sum/classes
    z_true = mul_scalar(z_true, static_cast<double>(classes));
    Var per_row = sub(logsumexp_rows(logits), z_true);
    return mean_all(per_row);
}

ModalityDiscriminator::ModalityDiscriminator(std::string prefix, const AdversaryConfig& cfg,
                                             ParamStore& store, Rng& rng)
    : prefix_(std::move(prefix)), cfg_(cfg) {
    cfg_.validate();
    store.add_weight(prefix_ + ".proj.w", cfg_.d_in, cfg_.d_embed, rng);
    store.add_zeros(prefix_ + ".proj.b", {cfg_.d_embed});
    store.add_weight(prefix_ + ".classes", cfg_.d_embed, kModalityCount, rng);
}

Var ModalityDiscriminator::embed(Tape& tape, const VarMap& vars, Var rep_valid_rows) const {
    Var pooled = mean_rows(rep_valid_rows);
    Var row = broadcast_row(pooled, 1);  // 1 x d
    Var projected = linear(row, vars.at(prefix_ + ".proj.w"), vars.at(prefix_ + ".proj.b"));
    (void)tape;
    return normalize_rows(projected, NormalizeMode::kEpsAdd);
}

Var ModalityDiscriminator::class_directions(Tape& tape, const VarMap& vars) const {
    (void)tape;
    return normalize_cols(vars.at(prefix_ + ".classes"), NormalizeMode::kEpsAdd);
}

Var ModalityDiscriminator::loss(Tape& tape, const VarMap& vars, Var embedded_rows,
                                const std::vector<int>& labels) const {
    return aam_loss(tape, embedded_rows, class_directions(tape, vars), labels, cfg_.scale,
                    cfg_.margin);
}

}  // namespace trimodal
