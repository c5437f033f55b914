// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trimodal {

/// One annotated clip: per-modality feature sequences and a sentiment score
/// in [-3, 3].
struct Sample {
    std::string id;
    double label = 0.0;
    std::vector<std::vector<double>> text;
    std::vector<std::vector<double>> audio;
    std::vector<std::vector<double>> video;
};

/// Synthetic generator settings. Every sample derives its own RNG stream from
/// (seed, index), so content is independent of generation order.
///
/// Per sample: a label z ~ U[-3,3] drives a shared latent u = tanh(z*w + c);
/// each modality-m frame is strength_m * u * A_m + s_m * B_m + eps_t with a
/// per-sample specific latent s_m ~ N(0, I) and frame noise eps_t. Video
/// noise follows an AR(1) walk with coefficient rho, so high rho yields
/// redundant adjacent frames. Text carries the largest strength.
struct SynthConfig {
    std::size_t n_samples = 2000;
    std::size_t d_text = 16;
    std::size_t d_audio = 12;
    std::size_t d_video = 20;
    std::size_t len_text_min = 6, len_text_max = 12;
    std::size_t len_audio_min = 10, len_audio_max = 16;
    std::size_t len_video_min = 8, len_video_max = 14;
    double strength_text = 1.5;
    double strength_audio = 0.8;
    double strength_video = 0.8;
    double video_autocorr = 0.9;  // rho in [0, 1)
    double noise_text = 0.3;
    double noise_audio = 0.3;
    double noise_video = 0.5;
    std::size_t d_latent = 8;
    std::uint64_t seed = 7;

    void validate() const;
};

std::vector<Sample> generate(const SynthConfig& cfg);

/// Add i.i.d. zero-mean Gaussian noise of the given variance to every feature
/// of the selected modalities. Seeded and order-independent per sample.
void add_noise(std::vector<Sample>& samples, double variance, std::uint64_t seed,
               bool on_text = true, bool on_audio = true, bool on_video = true);

/// Schema checks: label range, finite features, consistent widths, nonempty
/// sequences. `where` seeds the error message (e.g. "line 12").
void validate_sample(const Sample& s, const std::string& where);

/// One JSON object per line: {"id", "label", "text", "audio", "video"}.
/// Values round-trip exactly. Paths ending in ".gz" read/write gzip streams.
std::vector<Sample> read_jsonl(const std::string& path);
void write_jsonl(const std::vector<Sample>& samples, const std::string& path);

}  // namespace trimodal
