// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "trimodal/errors.hpp"

namespace trimodal {

namespace {

std::uint64_t to_le_bits(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return bits;
}

double from_le_bits(std::uint64_t bits) {
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

}  // namespace

void save_checkpoint(const ParamStore& params, const std::string& base_path) {
    nlohmann::json manifest;
    manifest["dtype"] = "float64-le";
    manifest["params"] = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& name : params.names()) {
        const Tensor& t = params.at(name);
        manifest["params"].push_back(
            {{"name", name}, {"shape", t.shape}, {"byte_offset", offset}});
        offset += t.numel() * sizeof(double);
    }
    manifest["total_bytes"] = offset;

    std::ofstream mf(base_path + ".json");
    if (!mf) throw ValidationError("save_checkpoint: cannot open " + base_path + ".json");
    mf << manifest.dump(2) << "\n";

    std::ofstream bf(base_path + ".bin", std::ios::binary);
    if (!bf) throw ValidationError("save_checkpoint: cannot open " + base_path + ".bin");
    for (const auto& name : params.names()) {
        const Tensor& t = params.at(name);
        for (double v : t.data) {
            std::uint64_t bits = to_le_bits(v);
            bf.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
        }
    }
}

ParamStore load_checkpoint(const std::string& base_path) {
    std::ifstream mf(base_path + ".json");
    if (!mf) throw ValidationError("load_checkpoint: cannot open " + base_path + ".json");
    nlohmann::json manifest = nlohmann::json::parse(mf);

    std::ifstream bf(base_path + ".bin", std::ios::binary);
    if (!bf) throw ValidationError("load_checkpoint: cannot open " + base_path + ".bin");
    std::vector<char> blob((std::istreambuf_iterator<char>(bf)), std::istreambuf_iterator<char>());

    if (manifest.contains("total_bytes") &&
        manifest["total_bytes"].get<std::size_t>() != blob.size()) {
        throw ValidationError("load_checkpoint: blob size " + std::to_string(blob.size()) +
                              " does not match manifest total_bytes");
    }

    ParamStore store;
    for (const auto& entry : manifest["params"]) {
        std::string name = entry["name"].get<std::string>();
        std::vector<std::size_t> shape = entry["shape"].get<std::vector<std::size_t>>();
        std::size_t offset = entry["byte_offset"].get<std::size_t>();
        std::size_t n = shape_numel(shape);
        if (offset + n * sizeof(double) > blob.size()) {
            throw ValidationError("load_checkpoint: parameter '" + name + "' overruns the blob");
        }
        Tensor t = Tensor::zeros(shape);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, blob.data() + offset + i * sizeof(double), sizeof(bits));
            t.data[i] = from_le_bits(bits);
        }
        store.add(name, std::move(t));
    }
    return store;
}

}  // namespace trimodal
