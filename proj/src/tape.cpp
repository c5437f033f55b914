// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#include "trimodal/tape.hpp"

#include "trimodal/errors.hpp"

namespace trimodal {

const Tensor& Var::val() const { return tape->value_of(id); }

Var Tape::leaf(Tensor value) {
    nodes_.push_back(Node{std::move(value), Tensor{}, nullptr});
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::emit(Tensor value, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), Tensor{}, std::move(backward)});
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_of(std::uint32_t id) {
    Node& n = nodes_[id];
    if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
    return n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw ContractError("backward: loss recorded on a different tape");
    if (backward_done_) throw ContractError("backward: tape already differentiated");
    if (!loss.val().is_scalar()) {
        throw ContractError("backward: loss must be scalar, got shape " + loss.val().shape_str());
    }
    grad_of(loss.id).data[0] = 1.0;
    for (std::uint32_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.grad.data.empty() || !n.backward) continue;
        n.backward(*this, i);
    }
    backward_done_ = true;
}

Tensor Tape::gradient(Var v) const {
    if (v.tape != this) throw ContractError("gradient: var from a different tape");
    const Node& n = nodes_[v.id];
    if (n.grad.data.empty()) return Tensor::zeros(n.value.shape);
    return n.grad;
}

}  // namespace trimodal
