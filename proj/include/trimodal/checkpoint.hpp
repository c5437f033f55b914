// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "trimodal/params.hpp"

namespace trimodal {

/// Checkpoints are a pair of files: `<base>.json`, an ordered manifest of
/// {name, shape, byte_offset}, and `<base>.bin`, the concatenated parameter
/// data as little-endian 64-bit floats. Round-trips are bit-exact.
void save_checkpoint(const ParamStore& params, const std::string& base_path);

ParamStore load_checkpoint(const std::string& base_path);

}  // namespace trimodal
