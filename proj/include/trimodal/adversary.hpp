// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "trimodal/ops.hpp"
#include "trimodal/params.hpp"

namespace trimodal {

/// Modality class ids. The ordering is part of the wire contract for
/// discriminator labels.
enum class Modality : int { kAudio = 0, kText = 1, kVideo = 2 };
inline constexpr std::size_t kModalityCount = 3;

/// Settings for the modality discriminator and its angular-margin objective.
struct AdversaryConfig {
    std::size_t d_in = 64;     // representation width entering the discriminator
    std::size_t d_embed = 64;  // hypersphere embedding width
    double scale = 30.0;       // angular logit scale
    double margin = 0.35;      // additive angular margin, radians
    double grl_lambda = 1.0;   // gradient-reversal strength on the invariant path
    bool grl_on_specific = false;

    void validate() const;
};

/// Additive-angular-margin loss over unit-norm rows against unit-norm class
/// directions: per row, -log softmax of scale*cos(theta + margin) at the true
/// class vs scale*cos(theta) elsewhere, averaged over rows. Cosines are
/// clamped to [-1, 1] before arccos, so exactly aligned rows are safe.
Var aam_loss(Tape& tape, Var unit_rows, Var class_dirs_unit_cols, const std::vector<int>& labels,
             double scale, double margin);

/// One-hidden-projection modality discriminator: mean-pool over time, affine
/// map, row L2-normalization onto the sphere. Class directions are
/// renormalized column-wise at every use so the optimizer stays
/// unconstrained.
class ModalityDiscriminator {
public:
    ModalityDiscriminator(std::string prefix, const AdversaryConfig& cfg, ParamStore& store,
                          Rng& rng);

    /// Pool -> affine -> normalize; rows divide by (norm + 1e-12).
    Var embed(Tape& tape, const VarMap& vars, Var rep_valid_rows) const;

    /// Unit-column class direction matrix for this forward pass.
    Var class_directions(Tape& tape, const VarMap& vars) const;

    Var loss(Tape& tape, const VarMap& vars, Var embedded_rows,
             const std::vector<int>& labels) const;

private:
    std::string prefix_;
    AdversaryConfig cfg_;
};

}  // namespace trimodal
