// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "trimodal/rng.hpp"
#include "trimodal/tape.hpp"
#include "trimodal/tensor.hpp"

namespace trimodal {

/// Named parameter registry. Iteration follows insertion order, which fixes
/// the ordering of checkpoint manifests, tape leaves and optimizer updates.
class ParamStore {
public:
    void add(const std::string& name, Tensor value);
    void add_weight(const std::string& name, std::size_t fan_in, std::size_t fan_out, Rng& rng);
    void add_zeros(const std::string& name, std::vector<std::size_t> shape);
    void add_ones(const std::string& name, std::vector<std::size_t> shape);

    bool has(const std::string& name) const { return index_.count(name) != 0; }
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;

    const std::vector<std::string>& names() const { return order_; }
    std::size_t size() const { return order_.size(); }
    std::size_t total_elements() const;

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, Tensor> values_;
    std::unordered_map<std::string, int> index_;
};

using VarMap = std::map<std::string, Var>;

/// Insert every parameter as a tape leaf, in registry order.
VarMap lease_params(Tape& tape, const ParamStore& store);

/// Adam with bias correction. Parameters absent from a step's gradient map
/// are treated as zero-gradient (their moments stay untouched at zero until
/// a real gradient arrives).
class Adam {
public:
    Adam(ParamStore& store, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    /// Apply one update from the gradients accumulated on `tape` for the
    /// leaves in `leases`.
    void step(const Tape& tape, const VarMap& leases);

    std::size_t steps_taken() const { return t_; }

private:
    ParamStore& store_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::unordered_map<std::string, Tensor> m_;
    std::unordered_map<std::string, Tensor> v_;
};

}  // namespace trimodal
