// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <memory>
#include <optional>

#include "trimodal/adversary.hpp"
#include "trimodal/data.hpp"
#include "trimodal/disentangle.hpp"
#include "trimodal/encoders.hpp"
#include "trimodal/fusion.hpp"
#include "trimodal/temporal.hpp"

namespace trimodal {

/// Full model settings: extraction stack, disentanglement, adversary, fusion
/// and the objective trade-offs.
struct ModelConfig {
    EncoderConfig encoder;

    std::size_t d_fbp = 16;
    std::size_t fbp_pool = 4;
    std::size_t d_disc = 64;
    std::size_t d_head_hidden = 32;

    double aam_scale = 30.0;
    double aam_margin = 0.35;
    double grl_lambda = 1.0;

    double w_consistency = 0.3;  // consistency trade-off
    double w_temporal = 0.1;     // temporal-invariance trade-off
    double w_domain = 0.1;       // adversarial trade-off
    std::size_t cmd_order = 5;

    bool grl_enabled = true;      // false removes the reversal node entirely
    bool grl_on_specific = false; // literal reading: reversal on both subspaces
    bool fbp_on_specific = false; // literal reading: gates from specific features
    bool gate_squash = true;      // sigmoid on the gate signal
    bool unit_gates = false;      // ablation: gates forced to all-ones
    bool til_on_specific = false; // constrain the specific video representation
    TemporalConfig::Mode til_mode = TemporalConfig::Mode::kSoftmax;

    enum class Task { kRegression, kClassification };
    Task task = Task::kRegression;
    std::size_t n_classes = 7;

    double dropout = 0.0;  // transformer dropout; keep 0 for gradient checks

    void validate() const;
};

/// One padded per-modality sequence plus its true length.
struct SequenceInput {
    Tensor features;  // max_len x d
    std::size_t valid_len = 0;
};

/// A model-ready sample: padded/truncated sequences and the label.
struct BatchItem {
    SequenceInput text, audio, video;
    double label = 0.0;
    std::string id;
};

/// Pad (with zeros) or truncate (from the end) a raw sample to the configured
/// grid.
BatchItem make_batch_item(const Sample& sample, const ModelConfig& cfg);
std::vector<BatchItem> make_batch_items(const std::vector<Sample>& samples,
                                        const ModelConfig& cfg);

/// The assembled network: extraction, subspace encoders, discriminator,
/// semantic-guided fusion and prediction head, all parameters in one registry.
class Model {
public:
    Model(ModelConfig cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    /// Replace the parameter values (e.g. from a checkpoint). Names and
    /// shapes must match the architecture exactly.
    void load_params(const ParamStore& loaded);

    /// Per-sample forward results; all sequence Vars hold valid rows only.
    struct Trace {
        std::array<Var, kModalityCount> low_level;   // post-extraction
        std::array<Var, kModalityCount> invariant;   // shared-encoder outputs
        std::array<Var, kModalityCount> specific;    // private-encoder outputs
        Var til_target;                              // video rep the temporal loss sees
        Var gate_audio, gate_video;                  // valid when gates are computed
        Var prediction;                              // 1x1 (regression) or 1xC logits
    };

    Trace forward_sample(Tape& tape, const VarMap& vars, const BatchItem& item,
                         Rng* dropout_rng = nullptr) const;

    struct LossVars {
        Var total, task, consistency, temporal, domain;
        TotalLossBreakdown breakdown;
    };

    /// Objective over a mini-batch: task loss plus the three weighted
    /// regularizers. Consistency pools valid time steps across the batch;
    /// the domain term runs the discriminator on all six (subspace, modality)
    /// streams.
    LossVars batch_loss(Tape& tape, const VarMap& vars, const std::vector<BatchItem>& batch,
                        Rng* dropout_rng = nullptr) const;

    /// Frozen-parameter prediction as a sentiment score (argmax class mapped
    /// back to [-3, 3] in classification mode).
    double predict(const BatchItem& item) const;
    std::vector<double> predict_all(const std::vector<BatchItem>& items) const;

    /// Mean-pooled (over valid steps) subspace embeddings for probing.
    struct PooledReps {
        std::array<Tensor, kModalityCount> invariant;
        std::array<Tensor, kModalityCount> specific;
    };
    PooledReps pooled_reps(const BatchItem& item) const;

    /// Mean adjacent-frame JSD of the temporal-loss target representation.
    double adjacent_frame_jsd(const BatchItem& item) const;

private:
    Var task_loss(Tape& tape, const std::vector<Var>& predictions,
                  const std::vector<double>& labels) const;
    Var domain_loss(Tape& tape, const VarMap& vars,
                    const std::vector<Trace>& traces) const;

    ModelConfig cfg_;
    ParamStore params_;
    std::unique_ptr<TextProjection> text_proj_;
    std::unique_ptr<TransformerEncoder> audio_enc_;
    std::unique_ptr<TransformerEncoder> video_enc_;
    std::unique_ptr<FeedForwardEncoder> shared_enc_;
    std::array<std::unique_ptr<FeedForwardEncoder>, kModalityCount> private_enc_;
    std::unique_ptr<ModalityDiscriminator> discriminator_;
    std::unique_ptr<FbpGate> gate_;
    std::unique_ptr<PredictionHead> head_;
};

/// Sentiment class index for [-3, 3] scores: round then clamp to 7 bins.
int sentiment_class(double score);

}  // namespace trimodal
