// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "trimodal/tensor.hpp"

namespace trimodal {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid only as long as
/// the owning tape is alive.
struct Var {
    Tape* tape = nullptr;
    std::uint32_t id = 0;

    bool valid() const { return tape != nullptr; }
    const Tensor& val() const;
    const std::vector<std::size_t>& shape() const { return val().shape; }
};

/// Records a differentiable computation as an append-only list of nodes.
/// Node ids grow monotonically and every node's inputs precede it, so walking
/// ids in descending order from the loss is a reverse topological traversal:
/// a node's gradient is complete before its own backward rule reads it.
///
/// A tape and its Vars are confined to one thread for a forward/backward
/// pass; tensors read out of it are plain values and travel freely.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Record an input value (parameter or constant). Leaves have no backward rule.
    Var leaf(Tensor value);

    /// Record an op result together with its gradient scatter rule.
    Var emit(Tensor value, BackwardFn backward);

    /// Run reverse-mode accumulation from a scalar loss. May be called once
    /// per tape. Throws ContractError on a non-scalar loss.
    void backward(Var loss);

    const Tensor& value_of(std::uint32_t id) const { return nodes_[id].value; }

    /// Gradient accumulator for a node, allocated (zeros) on first touch.
    Tensor& grad_of(std::uint32_t id);

    bool has_grad(std::uint32_t id) const { return !nodes_[id].grad.data.empty(); }

    /// Gradient of a node after backward; zeros if the loss never reached it.
    Tensor gradient(Var v) const;

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // empty until touched
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace trimodal
