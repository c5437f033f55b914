// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

#include "trimodal/errors.hpp"
#include "trimodal/rng.hpp"

namespace trimodal {

void SynthConfig::validate() const {
    if (n_samples == 0) throw ConfigError("SynthConfig: n_samples must be >= 1");
    if (d_text == 0 || d_audio == 0 || d_video == 0 || d_latent == 0) {
        throw ConfigError("SynthConfig: dims must be >= 1");
    }
    auto check_len = [](std::size_t lo, std::size_t hi, const char* name) {
        if (lo == 0 || hi < lo) {
            throw ConfigError(std::string("SynthConfig: bad length range for ") + name);
        }
    };
    check_len(len_text_min, len_text_max, "text");
    check_len(len_audio_min, len_audio_max, "audio");
    check_len(len_video_min, len_video_max, "video");
    if (!(video_autocorr >= 0.0 && video_autocorr < 1.0)) {
        throw ConfigError("SynthConfig: video_autocorr must lie in [0, 1)");
    }
    if (strength_text < 0.0 || strength_audio < 0.0 || strength_video < 0.0) {
        throw ConfigError("SynthConfig: strengths must be >= 0");
    }
    if (noise_text < 0.0 || noise_audio < 0.0 || noise_video < 0.0) {
        throw ConfigError("SynthConfig: noise scales must be >= 0");
    }
}

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix random_mixing(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, std::vector<double>(cols));
    double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (auto& row : m)
        for (double& v : row) v = rng.normal() * scale;
    return m;
}

std::vector<double> mix(const std::vector<double>& latent, const Matrix& m) {
    std::vector<double> out(m[0].size(), 0.0);
    for (std::size_t i = 0; i < latent.size(); ++i)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += latent[i] * m[i][j];
    return out;
}

struct ModalityPlan {
    std::size_t dim;
    std::size_t len_min, len_max;
    double strength;
    double noise;
    bool ar1;  // AR(1) frame noise (video)
};

std::vector<std::vector<double>> synth_sequence(const ModalityPlan& plan,
                                                const std::vector<double>& shared_latent,
                                                const Matrix& shared_mix, const Matrix& specific_mix,
                                                double rho, Rng& rng) {
    std::size_t len = static_cast<std::size_t>(rng.uniform_int(plan.len_min, plan.len_max));
    std::vector<double> specific(shared_latent.size());
    for (double& v : specific) v = rng.normal();
    std::vector<double> signal = mix(shared_latent, shared_mix);
    std::vector<double> style = mix(specific, specific_mix);

    std::vector<std::vector<double>> frames(len, std::vector<double>(plan.dim));
    std::vector<double> eps(plan.dim, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
        if (plan.ar1 && t > 0) {
            double fresh = std::sqrt(1.0 - rho * rho);
            for (double& e : eps) e = rho * e + fresh * plan.noise * rng.normal();
        } else {
            for (double& e : eps) e = plan.noise * rng.normal();
        }
        for (std::size_t j = 0; j < plan.dim; ++j) {
            frames[t][j] = plan.strength * signal[j] + style[j] + eps[j];
        }
    }
    return frames;
}

}  // namespace

std::vector<Sample> generate(const SynthConfig& cfg) {
    cfg.validate();

    // Mixing matrices are fixed per dataset (seeded from the master seed),
    // not per sample.
    Rng structure_rng(Rng::mix(cfg.seed, 0x5eed));
    std::vector<double> shared_dir(cfg.d_latent);
    std::vector<double> shared_bias(cfg.d_latent);
    for (double& v : shared_dir) v = structure_rng.normal();
    for (double& v : shared_bias) v = structure_rng.normal() * 0.5;
    Matrix mix_text_shared = random_mixing(cfg.d_latent, cfg.d_text, structure_rng);
    Matrix mix_text_specific = random_mixing(cfg.d_latent, cfg.d_text, structure_rng);
    Matrix mix_audio_shared = random_mixing(cfg.d_latent, cfg.d_audio, structure_rng);
    Matrix mix_audio_specific = random_mixing(cfg.d_latent, cfg.d_audio, structure_rng);
    Matrix mix_video_shared = random_mixing(cfg.d_latent, cfg.d_video, structure_rng);
    Matrix mix_video_specific = random_mixing(cfg.d_latent, cfg.d_video, structure_rng);

    ModalityPlan text_plan{cfg.d_text, cfg.len_text_min, cfg.len_text_max, cfg.strength_text,
                           cfg.noise_text, false};
    ModalityPlan audio_plan{cfg.d_audio, cfg.len_audio_min, cfg.len_audio_max, cfg.strength_audio,
                            cfg.noise_audio, false};
    ModalityPlan video_plan{cfg.d_video, cfg.len_video_min, cfg.len_video_max, cfg.strength_video,
                            cfg.noise_video, true};

    std::vector<Sample> out;
    out.reserve(cfg.n_samples);
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
        Rng rng(Rng::mix(cfg.seed, i + 1));
        Sample s;
        s.id = "synth-" + std::to_string(i);
        s.label = rng.uniform(-3.0, 3.0);
        std::vector<double> shared_latent(cfg.d_latent);
        for (std::size_t j = 0; j < cfg.d_latent; ++j) {
            shared_latent[j] = std::tanh(s.label * shared_dir[j] + shared_bias[j]);
        }
        s.text = synth_sequence(text_plan, shared_latent, mix_text_shared, mix_text_specific, 0.0,
                                rng);
        s.audio = synth_sequence(audio_plan, shared_latent, mix_audio_shared, mix_audio_specific,
                                 0.0, rng);
        s.video = synth_sequence(video_plan, shared_latent, mix_video_shared, mix_video_specific,
                                 cfg.video_autocorr, rng);
        out.push_back(std::move(s));
    }
    return out;
}

void add_noise(std::vector<Sample>& samples, double variance, std::uint64_t seed, bool on_text,
               bool on_audio, bool on_video) {
    if (variance < 0.0) throw ContractError("add_noise: variance must be >= 0");
    if (variance == 0.0) return;  // bit-identical passthrough
    double sigma = std::sqrt(variance);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Rng rng(Rng::mix(seed, 0xA0D5E + i));
        auto corrupt = [&](std::vector<std::vector<double>>& seq) {
            for (auto& frame : seq)
                for (double& v : frame) v += sigma * rng.normal();
        };
        if (on_text) corrupt(samples[i].text);
        if (on_audio) corrupt(samples[i].audio);
        if (on_video) corrupt(samples[i].video);
    }
}

void validate_sample(const Sample& s, const std::string& where) {
    if (!(s.label >= -3.0 && s.label <= 3.0)) {
        throw ValidationError(where + ": label " + std::to_string(s.label) +
                              " outside [-3, 3]");
    }
    auto check = [&](const std::vector<std::vector<double>>& seq, const char* name) {
        if (seq.empty()) throw ValidationError(where + ": empty " + std::string(name) + " sequence");
        std::size_t width = seq[0].size();
        if (width == 0) throw ValidationError(where + ": zero-width " + std::string(name) + " vectors");
        for (const auto& frame : seq) {
            if (frame.size() != width) {
                throw ValidationError(where + ": ragged " + std::string(name) + " widths (" +
                                      std::to_string(frame.size()) + " vs " +
                                      std::to_string(width) + ")");
            }
            for (double v : frame) {
                if (!std::isfinite(v)) {
                    throw ValidationError(where + ": non-finite value in " + std::string(name));
                }
            }
        }
    };
    check(s.text, "text");
    check(s.audio, "audio");
    check(s.video, "video");
}

namespace {

bool has_gz_suffix(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::vector<std::string> lines;
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (f == nullptr) throw ValidationError("read_jsonl: cannot open " + path);
        std::string current;
        char buf[1 << 15];
        int got;
        while ((got = gzread(f, buf, sizeof(buf))) > 0) {
            current.append(buf, static_cast<std::size_t>(got));
        }
        gzclose(f);
        std::istringstream is(current);
        std::string line;
        while (std::getline(is, line)) lines.push_back(line);
        return lines;
    }
    std::ifstream f(path);
    if (!f) throw ValidationError("read_jsonl: cannot open " + path);
    std::string line;
    while (std::getline(f, line)) lines.push_back(line);
    return lines;
}

std::vector<std::vector<double>> parse_sequence(const nlohmann::json& j, const char* name,
                                                const std::string& where) {
    if (!j.contains(name) || !j[name].is_array()) {
        throw ValidationError(where + ": missing or non-array field \"" + name + "\"");
    }
    std::vector<std::vector<double>> seq;
    for (const auto& frame : j[name]) {
        if (!frame.is_array()) throw ValidationError(where + ": frame is not an array in " + name);
        std::vector<double> row;
        for (const auto& v : frame) {
            if (!v.is_number()) throw ValidationError(where + ": non-numeric feature in " + name);
            row.push_back(v.get<double>());
        }
        seq.push_back(std::move(row));
    }
    return seq;
}

}  // namespace

std::vector<Sample> read_jsonl(const std::string& path) {
    std::vector<Sample> samples;
    std::vector<std::string> lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
        if (blank) continue;
        std::string where = "line " + std::to_string(i + 1);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": malformed JSON (" + e.what() + ")");
        }
        Sample s;
        if (!j.contains("id") || !j["id"].is_string()) {
            throw ValidationError(where + ": missing string field \"id\"");
        }
        if (!j.contains("label") || !j["label"].is_number()) {
            throw ValidationError(where + ": missing numeric field \"label\"");
        }
        s.id = j["id"].get<std::string>();
        s.label = j["label"].get<double>();
        s.text = parse_sequence(j, "text", where);
        s.audio = parse_sequence(j, "audio", where);
        s.video = parse_sequence(j, "video", where);
        validate_sample(s, where);
        samples.push_back(std::move(s));
    }
    return samples;
}

void write_jsonl(const std::vector<Sample>& samples, const std::string& path) {
    std::ostringstream out;
    for (const auto& s : samples) {
        nlohmann::json j;
        j["id"] = s.id;
        j["label"] = s.label;
        j["text"] = s.text;
        j["audio"] = s.audio;
        j["video"] = s.video;
        out << j.dump() << "\n";
    }
    std::string payload = out.str();
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (f == nullptr) throw ValidationError("write_jsonl: cannot open " + path);
        if (gzwrite(f, payload.data(), static_cast<unsigned>(payload.size())) == 0 &&
            !payload.empty()) {
            gzclose(f);
            throw ValidationError("write_jsonl: gzip write failed for " + path);
        }
        gzclose(f);
        return;
    }
    std::ofstream f(path);
    if (!f) throw ValidationError("write_jsonl: cannot open " + path);
    f << payload;
}

}  // namespace trimodal
