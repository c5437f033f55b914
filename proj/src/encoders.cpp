// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/encoders.hpp"

#include <cmath>

#include "trimodal/errors.hpp"

namespace trimodal {

void EncoderConfig::validate() const {
    if (d_model == 0 || n_heads == 0 || n_layers == 0 || d_ff == 0) {
        throw ConfigError("EncoderConfig: widths and depths must be >= 1");
    }
    if (d_model % n_heads != 0) {
        throw ConfigError("EncoderConfig: d_model " + std::to_string(d_model) +
                          " not divisible by n_heads " + std::to_string(n_heads));
    }
    if (max_len_text == 0 || max_len_audio == 0 || max_len_video == 0) {
        throw ConfigError("EncoderConfig: max_len must be >= 1 for every modality");
    }
    if (d_text == 0 || d_audio == 0 || d_video == 0) {
        throw ConfigError("EncoderConfig: input dims must be >= 1");
    }
}

Tensor positional_encoding(std::size_t length, std::size_t width) {
    if (length == 0 || width == 0) throw ContractError("positional_encoding: extents must be >= 1");
    Tensor pe = Tensor::zeros({length, width});
    for (std::size_t p = 0; p < length; ++p) {
        for (std::size_t i = 0; i < width; ++i) {
            double exponent = static_cast<double>(i - (i % 2)) / static_cast<double>(width);
            double angle = static_cast<double>(p) / std::pow(10000.0, exponent);
            pe.at(p, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

TransformerEncoder::TransformerEncoder(std::string prefix, std::size_t d_in,
                                       const EncoderConfig& cfg, ParamStore& store, Rng& rng)
    : prefix_(std::move(prefix)),
      d_in_(d_in),
      d_model_(cfg.d_model),
      n_heads_(cfg.n_heads),
      n_layers_(cfg.n_layers),
      d_ff_(cfg.d_ff) {
    store.add_weight(prefix_ + ".in.w", d_in_, d_model_, rng);
    store.add_zeros(prefix_ + ".in.b", {d_model_});
    for (std::size_t l = 0; l < n_layers_; ++l) {
        std::string base = prefix_ + ".layer" + std::to_string(l);
        for (const char* proj : {"q", "k", "v", "o"}) {
            store.add_weight(base + ".attn." + proj + ".w", d_model_, d_model_, rng);
            store.add_zeros(base + ".attn." + std::string(proj) + ".b", {d_model_});
        }
        store.add_ones(base + ".ln1.g", {d_model_});
        store.add_zeros(base + ".ln1.b", {d_model_});
        store.add_weight(base + ".ff.w1", d_model_, d_ff_, rng);
        store.add_zeros(base + ".ff.b1", {d_ff_});
        store.add_weight(base + ".ff.w2", d_ff_, d_model_, rng);
        store.add_zeros(base + ".ff.b2", {d_model_});
        store.add_ones(base + ".ln2.g", {d_model_});
        store.add_zeros(base + ".ln2.b", {d_model_});
    }
}

Var TransformerEncoder::forward(Tape& tape, const VarMap& vars, Var padded_input,
                                std::size_t valid_len, double dropout_rate,
                                Rng* dropout_rng) const {
    const Tensor& xval = padded_input.val();
    if (xval.rank() != 2 || xval.cols() != d_in_) {
        throw DimensionError(prefix_ + ": input shape " + xval.shape_str() + " vs expected width " +
                             std::to_string(d_in_));
    }
    std::size_t n = xval.rows();
    if (valid_len == 0 || valid_len > n) {
        throw ContractError(prefix_ + ": valid_len " + std::to_string(valid_len) +
                            " out of range for " + std::to_string(n) + " steps");
    }

    Var h = linear(padded_input, vars.at(prefix_ + ".in.w"), vars.at(prefix_ + ".in.b"));
    h = add(h, constant(tape, positional_encoding(n, d_model_)));

    // Additive key mask: a -1e9 logit underflows to an exact 0.0 attention
    // weight after max subtraction, so padded content cannot leak into valid
    // positions.
    Tensor mask = Tensor::zeros({n, n});
    for (std::size_t q = 0; q < n; ++q)
        for (std::size_t kpos = valid_len; kpos < n; ++kpos) mask.at(q, kpos) = -1e9;
    Var key_mask = constant(tape, mask);

    std::size_t d_head = d_model_ / n_heads_;
    double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

    for (std::size_t l = 0; l < n_layers_; ++l) {
        std::string base = prefix_ + ".layer" + std::to_string(l);
        Var q = linear(h, vars.at(base + ".attn.q.w"), vars.at(base + ".attn.q.b"));
        Var k = linear(h, vars.at(base + ".attn.k.w"), vars.at(base + ".attn.k.b"));
        Var v = linear(h, vars.at(base + ".attn.v.w"), vars.at(base + ".attn.v.b"));

        std::vector<Var> heads;
        heads.reserve(n_heads_);
        for (std::size_t hd = 0; hd < n_heads_; ++hd) {
            Var qh = slice_cols(q, hd * d_head, (hd + 1) * d_head);
            Var kh = slice_cols(k, hd * d_head, (hd + 1) * d_head);
            Var vh = slice_cols(v, hd * d_head, (hd + 1) * d_head);
            Var logits = mul_scalar(matmul(qh, transpose(kh)), scale);
            Var weights = softmax(add(logits, key_mask), 1);
            heads.push_back(matmul(weights, vh));
        }
        Var attn = concat_cols(heads);
        attn = linear(attn, vars.at(base + ".attn.o.w"), vars.at(base + ".attn.o.b"));
        if (dropout_rate > 0.0 && dropout_rng != nullptr) {
            attn = dropout(attn, dropout_rate, *dropout_rng);
        }
        h = layer_norm(add(h, attn), vars.at(base + ".ln1.g"), vars.at(base + ".ln1.b"));

        Var ff = linear(h, vars.at(base + ".ff.w1"), vars.at(base + ".ff.b1"));
        ff = gelu(ff);
        ff = linear(ff, vars.at(base + ".ff.w2"), vars.at(base + ".ff.b2"));
        if (dropout_rate > 0.0 && dropout_rng != nullptr) {
            ff = dropout(ff, dropout_rate, *dropout_rng);
        }
        h = layer_norm(add(h, ff), vars.at(base + ".ln2.g"), vars.at(base + ".ln2.b"));
    }
    return h;
}

TextProjection::TextProjection(std::string prefix, std::size_t d_in, std::size_t d_model,
                               ParamStore& store, Rng& rng)
    : prefix_(std::move(prefix)), d_in_(d_in), d_model_(d_model) {
    store.add_weight(prefix_ + ".w", d_in_, d_model_, rng);
    store.add_zeros(prefix_ + ".b", {d_model_});
}

Var TextProjection::forward(Tape& tape, const VarMap& vars, Var text_features) const {
    (void)tape;
    const Tensor& x = text_features.val();
    if (x.rank() != 2 || x.cols() != d_in_) {
        throw DimensionError(prefix_ + ": input shape " + x.shape_str() + " vs expected width " +
                             std::to_string(d_in_));
    }
    return linear(text_features, vars.at(prefix_ + ".w"), vars.at(prefix_ + ".b"));
}

FeedForwardEncoder::FeedForwardEncoder(std::string prefix, std::size_t d_model, ParamStore& store,
                                       Rng& rng)
    : prefix_(std::move(prefix)) {
    store.add_weight(prefix_ + ".w1", d_model, d_model, rng);
    store.add_zeros(prefix_ + ".b1", {d_model});
    store.add_ones(prefix_ + ".ln.g", {d_model});
    store.add_zeros(prefix_ + ".ln.b", {d_model});
    store.add_weight(prefix_ + ".w2", d_model, d_model, rng);
    store.add_zeros(prefix_ + ".b2", {d_model});
}

Var FeedForwardEncoder::forward(Tape& tape, const VarMap& vars, Var h) const {
    (void)tape;
    Var z = linear(h, vars.at(prefix_ + ".w1"), vars.at(prefix_ + ".b1"));
    z = gelu(z);
    z = layer_norm(z, vars.at(prefix_ + ".ln.g"), vars.at(prefix_ + ".ln.b"));
    return linear(z, vars.at(prefix_ + ".w2"), vars.at(prefix_ + ".b2"));
}

}  // namespace trimodal
