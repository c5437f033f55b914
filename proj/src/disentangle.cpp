// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/disentangle.hpp"

#include <cmath>

#include "trimodal/errors.hpp"

namespace trimodal {

void CmdConfig::validate() const {
    if (order < 1) throw ConfigError("CmdConfig: order must be >= 1");
    if (!(hi > lo)) throw ConfigError("CmdConfig: support bounds require hi > lo");
}

Var cmd(Tape& tape, Var x, Var y, const CmdConfig& cfg) {
    cfg.validate();
    const Tensor& xv = x.val();
    const Tensor& yv = y.val();
    if (xv.rank() != 2 || yv.rank() != 2 || xv.cols() != yv.cols()) {
        throw DimensionError("cmd: feature dims differ, " + xv.shape_str() + " vs " +
                             yv.shape_str());
    }
    double span = std::fabs(cfg.hi - cfg.lo);

    Var mean_x = mean_rows(x);
    Var mean_y = mean_rows(y);
    Var total = mul_scalar(l2_norm(sub(mean_x, mean_y)), 1.0 / span);

    if (cfg.order >= 2) {
        Var centered_x = sub(x, broadcast_row(mean_x, xv.rows()));
        Var centered_y = sub(y, broadcast_row(mean_y, yv.rows()));
        double scale = span;
        for (std::size_t k = 2; k <= cfg.order; ++k) {
            scale *= span;
            Var mom_x = mean_rows(pow_int(centered_x, static_cast<int>(k)));
            Var mom_y = mean_rows(pow_int(centered_y, static_cast<int>(k)));
            total = add(total, mul_scalar(l2_norm(sub(mom_x, mom_y)), 1.0 / scale));
        }
    }
    (void)tape;
    return total;
}

Var consistency_loss(Tape& tape, Var inv_audio, Var inv_video, Var inv_text,
                     const CmdConfig& cfg) {
    Var a = tanh(inv_audio);
    Var v = tanh(inv_video);
    Var t = tanh(inv_text);
    Var pair_av = cmd(tape, a, v, cfg);
    Var pair_at = cmd(tape, a, t, cfg);
    Var pair_vt = cmd(tape, v, t, cfg);
    return mul_scalar(add(add(pair_av, pair_at), pair_vt), 1.0 / 3.0);
}

}  // namespace trimodal
