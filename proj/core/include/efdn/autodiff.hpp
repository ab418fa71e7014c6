// Copyright 2026 The EFDN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "efdn/filters.hpp"
#include "efdn/loss.hpp"
#include "efdn/network.hpp"
#include "efdn/tensor.hpp"

namespace efdn {

/// Handle to a value recorded on a Tape.
struct Var {
    std::size_t id = 0;
};

/// Reverse-mode tape over the ops the networks here need. Nodes are appended in
/// execution order, so reverse insertion order is a reverse topological order.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Input that never receives a gradient.
    Var constant(Tensor value);

    /// Trainable leaf backed by external storage. Recording the same storage
    /// twice returns the same Var, so gradients from every use accumulate.
    Var param(std::span<const float> values, Shape4 shape);

    Var conv2d(Var x, Var weight, Var bias, int pad_h, int pad_w);
    Var scaled_depthwise3x3(Var x, FilterKind filter, Var scale, Var bias, int pad);
    Var add(Var a, Var b);
    Var concat(std::span<const Var> parts);
    Var slice(Var x, int begin, int end);
    Var leaky_relu(Var x, float slope);
    Var pixel_shuffle(Var x, int r);

    /// Scalar sum of every element.
    Var sum(Var x);
    /// Scalar sum of x * weights (elementwise).
    Var dot(Var x, const Tensor& weights);

    Var l1_loss(Var sr, const Tensor& hr);
    Var l2_loss(Var sr, const Tensor& hr);
    /// Scalar L_EG; components of the most recent evaluation are in last_eg_loss().
    Var eg_loss(Var sr, const Tensor& hr, const LossConfig& cfg);
    [[nodiscard]] const EgLoss& last_eg_loss() const noexcept { return last_eg_; }

    [[nodiscard]] const Tensor& value(Var v) const;

    /// Propagates d(root)/d(node) to every node that needs it. Throws
    /// UsageError unless root holds exactly one element.
    void backward(Var root);

    /// Gradient of the last backward root with respect to v (zeros if unreached).
    [[nodiscard]] Tensor grad(Var v) const;

    /// Gradient for a param leaf identified by its storage; empty if the
    /// storage was never recorded or no gradient reached it.
    [[nodiscard]] std::span<const float> param_grad(const float* storage) const;

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    void clear();

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool has_grad = false;
        bool requires_grad = false;
        std::vector<std::size_t> inputs;
        std::function<void(Tape&, const Node&)> backward;
    };

    Var push(Tensor value, std::vector<std::size_t> inputs, std::function<void(Tape&, const Node&)> backward);
    void accumulate(std::size_t id, const Tensor& g);
    [[nodiscard]] const Node& node(Var v) const;

    std::vector<Node> nodes_;
    std::unordered_map<const float*, std::size_t> params_;
    EgLoss last_eg_;
};

/// Records a ConvParams as (weight, bias) params and applies conv2d with the
/// given padding (defaults to the params' own).
Var record_conv(Tape& tape, Var x, const ConvParams& p);
Var record_conv(Tape& tape, Var x, const ConvParams& p, int pad_h, int pad_w);

/// Training-form EDBB: every branch recorded separately and summed.
Var record_edbb(Tape& tape, Var x, const EdbbParams& p);

/// Whole network on the tape, same topology as model_forward.
Var record_model(Tape& tape, const Model& m, Var lr);

} // namespace efdn
