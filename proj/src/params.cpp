// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/params.hpp"

#include <cmath>

#include "trimodal/errors.hpp"

namespace trimodal {

void ParamStore::add(const std::string& name, Tensor value) {
    if (has(name)) throw ConfigError("ParamStore: duplicate parameter '" + name + "'");
    index_[name] = static_cast<int>(order_.size());
    order_.push_back(name);
    values_.emplace(name, std::move(value));
}

void ParamStore::add_weight(const std::string& name, std::size_t fan_in, std::size_t fan_out,
                            Rng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w = Tensor::zeros({fan_in, fan_out});
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    add(name, std::move(w));
}

void ParamStore::add_zeros(const std::string& name, std::vector<std::size_t> shape) {
    add(name, Tensor::zeros(std::move(shape)));
}

void ParamStore::add_ones(const std::string& name, std::vector<std::size_t> shape) {
    add(name, Tensor::full(std::move(shape), 1.0));
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw ConfigError("ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw ConfigError("ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

std::size_t ParamStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& name : order_) n += values_.at(name).numel();
    return n;
}

VarMap lease_params(Tape& tape, const ParamStore& store) {
    VarMap vars;
    for (const auto& name : store.names()) {
        vars.emplace(name, tape.leaf(store.at(name)));
    }
    return vars;
}

Adam::Adam(ParamStore& store, double lr, double beta1, double beta2, double eps)
    : store_(store), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& name : store.names()) {
        m_.emplace(name, Tensor::zeros(store.at(name).shape));
        v_.emplace(name, Tensor::zeros(store.at(name).shape));
    }
}

void Adam::step(const Tape& tape, const VarMap& leases) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (const auto& name : store_.names()) {
        Tensor& p = store_.at(name);
        Tensor& m = m_.at(name);
        Tensor& v = v_.at(name);
        auto it = leases.find(name);
        Tensor grad = (it != leases.end()) ? tape.gradient(it->second) : Tensor::zeros(p.shape);
        for (std::size_t i = 0; i < p.numel(); ++i) {
            double g = grad.data[i];
            m.data[i] = beta1_ * m.data[i] + (1.0 - beta1_) * g;
            v.data[i] = beta2_ * v.data[i] + (1.0 - beta2_) * g * g;
            double mhat = m.data[i] / bc1;
            double vhat = v.data[i] / bc2;
            p.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

}  // namespace trimodal
