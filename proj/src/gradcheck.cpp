// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "trimodal/errors.hpp"

namespace trimodal {

double GradCheckReport::max_rel_err() const {
    double worst = 0.0;
    for (const auto& e : per_param) worst = std::max(worst, e.max_rel_err);
    return worst;
}

const GradCheckEntry* GradCheckReport::worst() const {
    const GradCheckEntry* w = nullptr;
    for (const auto& e : per_param) {
        if (w == nullptr || e.max_rel_err > w->max_rel_err) w = &e;
    }
    return w;
}

std::string GradCheckReport::summary() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << " max_rel_err=" << max_rel_err() << " tol=" << tolerance
       << " eps=" << eps;
    if (const GradCheckEntry* w = worst(); w != nullptr && !pass) {
        os << " worst=" << w->name << "[" << w->worst_index << "]"
           << " analytic=" << w->analytic_at_worst << " numeric=" << w->numeric_at_worst;
    }
    return os.str();
}

namespace {

double forward_value(const ScalarFn& f, const ParamStore& params) {
    Tape tape;
    VarMap vars = lease_params(tape, params);
    Var loss = f(tape, vars);
    if (!loss.val().is_scalar()) {
        throw ContractError("grad_check: function did not produce a scalar, shape " +
                            loss.val().shape_str());
    }
    return loss.val().data[0];
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, ParamStore& params, double eps, double tolerance) {
    if (eps <= 0.0) throw ContractError("grad_check: eps must be > 0");

    // Analytic pass.
    Tape tape;
    VarMap vars = lease_params(tape, params);
    Var loss = f(tape, vars);
    if (!loss.val().is_scalar()) {
        throw ContractError("grad_check: function did not produce a scalar, shape " +
                            loss.val().shape_str());
    }
    double base = loss.val().data[0];
    tape.backward(loss);

    // Determinism gate: a second independent forward must reproduce the loss
    // bit-for-bit, otherwise finite differences are meaningless.
    double replay = forward_value(f, params);
    if (std::memcmp(&base, &replay, sizeof(double)) != 0) {
        throw ContractError("grad_check: function is not deterministic (two forward passes "
                            "disagree)");
    }

    GradCheckReport report;
    report.eps = eps;
    report.tolerance = tolerance;

    for (const auto& name : params.names()) {
        const Tensor analytic = tape.gradient(vars.at(name));
        Tensor& p = params.at(name);
        GradCheckEntry entry;
        entry.name = name;
        for (std::size_t i = 0; i < p.numel(); ++i) {
            double keep = p.data[i];
            p.data[i] = keep + eps;
            double up = forward_value(f, params);
            p.data[i] = keep - eps;
            double down = forward_value(f, params);
            p.data[i] = keep;
            double numeric = (up - down) / (2.0 * eps);
            double a = analytic.data[i];
            double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            double rel = std::fabs(a - numeric) / denom;
            if (rel > entry.max_rel_err) {
                entry.max_rel_err = rel;
                entry.worst_index = i;
                entry.analytic_at_worst = a;
                entry.numeric_at_worst = numeric;
            }
        }
        report.per_param.push_back(std::move(entry));
    }
    report.pass = report.max_rel_err() < tolerance;
    return report;
}

}  // namespace trimodal
