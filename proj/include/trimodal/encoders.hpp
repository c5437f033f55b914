// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "trimodal/ops.hpp"
#include "trimodal/params.hpp"

namespace trimodal {

/// Width/depth settings shared by the feature-extraction stack.
struct EncoderConfig {
    std::size_t d_model = 64;
    std::size_t n_heads = 4;
    std::size_t n_layers = 2;
    std::size_t d_ff = 128;
    std::size_t max_len_text = 12;
    std::size_t max_len_audio = 16;
    std::size_t max_len_video = 14;
    std::size_t d_text = 16;
    std::size_t d_audio = 12;
    std::size_t d_video = 20;

    void validate() const;
};

/// Sinusoidal position table: PE[p, 2i] = sin(p / 10000^(2i/d)),
/// PE[p, 2i+1] = cos(p / 10000^(2i/d)).
Tensor positional_encoding(std::size_t length, std::size_t width);

/// Self-attention encoder over one padded sequence. Input is projected to
/// d_model, position-encoded, then passed through n_layers of
/// {multi-head self-attention -> residual+layernorm -> feed-forward ->
/// residual+layernorm}. Keys at padded positions get -1e9 added to their
/// logits, which underflows to an exact zero attention weight.
class TransformerEncoder {
public:
    TransformerEncoder(std::string prefix, std::size_t d_in, const EncoderConfig& cfg,
                       ParamStore& store, Rng& rng);

    Var forward(Tape& tape, const VarMap& vars, Var padded_input, std::size_t valid_len,
                double dropout_rate = 0.0, Rng* dropout_rng = nullptr) const;

private:
    std::string prefix_;
    std::size_t d_in_;
    std::size_t d_model_, n_heads_, n_layers_, d_ff_;
};

/// Learned affine map standing in for a pretrained text encoder: the text
/// features arrive pre-extracted and are projected to the model width.
class TextProjection {
public:
    TextProjection(std::string prefix, std::size_t d_in, std::size_t d_model, ParamStore& store,
                   Rng& rng);
    Var forward(Tape& tape, const VarMap& vars, Var text_features) const;

private:
    std::string prefix_;
    std::size_t d_in_, d_model_;
};

/// Two-layer MLP (linear -> gelu -> layernorm -> linear) used for both the
/// shared encoder (one parameter set applied to every modality) and the
/// private encoders (one parameter set per modality).
class FeedForwardEncoder {
public:
    FeedForwardEncoder(std::string prefix, std::size_t d_model, ParamStore& store, Rng& rng);
    Var forward(Tape& tape, const VarMap& vars, Var h) const;

private:
    std::string prefix_;
};

}  // namespace trimodal
