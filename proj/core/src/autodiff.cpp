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

#include "efdn/autodiff.hpp"

#include <algorithm>
#include <string>

#include "efdn/error.hpp"

namespace efdn {

namespace {

Shape4 bias_shape(std::size_t n) { return {1, static_cast<int>(n), 1, 1}; }

ConvParams conv_from(const Tensor& weight, const Tensor& bias, int pad_h, int pad_w) {
    return ConvParams{weight, bias.storage(), pad_h, pad_w};
}

Tensor scalar(double v) { return Tensor({1, 1, 1, 1}, static_cast<float>(v)); }

Tensor scaled(const Tensor& t, float s) {
    Tensor out = t;
    for (float& v : out.values()) {
        v *= s;
    }
    return out;
}

struct TapeOps {
    using Value = Var;
    Tape& tape;

    Var conv(Var x, const ConvParams& p) { return record_conv(tape, x, p); }
    Var edbb(Var x, const EdbbParams& p) { return record_edbb(tape, x, p); }
    Var add(Var a, Var b) { return tape.add(a, b); }
    Var concat(std::vector<Var> parts) { return tape.concat(parts); }
    Var act(Var x) { return tape.leaky_relu(x, kActivationSlope); }
    Var shuffle(Var x, int r) { return tape.pixel_shuffle(x, r); }
};

} // namespace

Var Tape::push(Tensor value, std::vector<std::size_t> inputs, std::function<void(Tape&, const Node&)> backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = std::any_of(inputs.begin(), inputs.end(), [&](std::size_t i) { return nodes_[i].requires_grad; });
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
    if (v.id >= nodes_.size()) {
        throw UsageError("tape: unknown variable " + std::to_string(v.id));
    }
    return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

void Tape::accumulate(std::size_t id, const Tensor& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) {
        return;
    }
    if (g.shape() != n.value.shape()) {
        throw DimensionError("tape: gradient " + to_string(g.shape()) + " for value " + to_string(n.value.shape()));
    }
    if (!n.has_grad) {
        n.grad = g;
        n.has_grad = true;
        return;
    }
    float* dst = n.grad.data();
    const float* src = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
        dst[i] += src[i];
    }
}

void Tape::clear() {
    nodes_.clear();
    params_.clear();
    last_eg_ = {};
}

Var Tape::constant(Tensor value) { return push(std::move(value), {}, nullptr); }

Var Tape::param(std::span<const float> values, Shape4 shape) {
    if (values.size() != shape.numel()) {
        throw DimensionError("tape: param storage of " + std::to_string(values.size()) + " values for shape " +
                             to_string(shape));
    }
    if (const auto it = params_.find(values.data()); it != params_.end()) {
        if (nodes_[it->second].value.shape() != shape) {
            throw DimensionError("tape: param recorded twice with different shapes");
        }
        return Var{it->second};
    }
    Node n;
    n.value = Tensor(shape, std::vector<float>(values.begin(), values.end()));
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    params_.emplace(values.data(), nodes_.size() - 1);
    return Var{nodes_.size() - 1};
}

Var Tape::conv2d(Var x, Var weight, Var bias, int pad_h, int pad_w) {
    const Tensor& w = value(weight);
    const Tensor& b = value(bias);
    if (b.size() != static_cast<std::size_t>(w.n())) {
        throw DimensionError("tape conv2d: bias length " + std::to_string(b.size()) + " for " +
                             std::to_string(w.n()) + " output channels");
    }
    Tensor out = efdn::conv2d(value(x), conv_from(w, b, pad_h, pad_w));
    return push(std::move(out), {x.id, weight.id, bias.id}, [pad_h, pad_w](Tape& t, const Node& n) {
        const Tensor& in = t.nodes_[n.inputs[0]].value;
        const Tensor& bias_value = t.nodes_[n.inputs[2]].value;
        const ConvParams p = conv_from(t.nodes_[n.inputs[1]].value, bias_value, pad_h, pad_w);
        if (t.nodes_[n.inputs[0]].requires_grad) {
            t.accumulate(n.inputs[0], conv2d_grad_input(n.grad, p, in.shape()));
        }
        if (t.nodes_[n.inputs[1]].requires_grad) {
            t.accumulate(n.inputs[1], conv2d_grad_weight(n.grad, in, p));
        }
        if (t.nodes_[n.inputs[2]].requires_grad) {
            t.accumulate(n.inputs[2], Tensor(bias_value.shape(), conv2d_grad_bias(n.grad)));
        }
    });
}

Var Tape::scaled_depthwise3x3(Var x, FilterKind filter, Var scale, Var bias, int pad) {
    Tensor out = efdn::scaled_depthwise3x3(value(x), filter_taps(filter), value(scale).values(), value(bias).values(), pad);
    return push(std::move(out), {x.id, scale.id, bias.id}, [filter, pad](Tape& t, const Node& n) {
        const Tensor& in = t.nodes_[n.inputs[0]].value;
        const Tensor& s = t.nodes_[n.inputs[1]].value;
        DepthwiseGrads g = scaled_depthwise3x3_grad(n.grad, in, filter_taps(filter), s.values(), pad);
        t.accumulate(n.inputs[0], g.input);
        t.accumulate(n.inputs[1], Tensor(s.shape(), std::move(g.scale)));
        t.accumulate(n.inputs[2], Tensor(t.nodes_[n.inputs[2]].value.shape(), std::move(g.bias)));
    });
}

Var Tape::add(Var a, Var b) {
    return push(efdn::add(value(a), value(b)), {a.id, b.id}, [](Tape& t, const Node& n) {
        t.accumulate(n.inputs[0], n.grad);
        t.accumulate(n.inputs[1], n.grad);
    });
}

Var Tape::concat(std::span<const Var> parts) {
    std::vector<const Tensor*> values;
    std::vector<std::size_t> ids;
    for (Var v : parts) {
        values.push_back(&value(v));
        ids.push_back(v.id);
    }
    return push(concat_channels(values), std::move(ids), [](Tape& t, const Node& n) {
        int at = 0;
        for (std::size_t id : n.inputs) {
            const int c = t.nodes_[id].value.c();
            if (t.nodes_[id].requires_grad) {
                t.accumulate(id, slice_channels(n.grad, at, at + c));
            }
            at += c;
        }
    });
}

Var Tape::slice(Var x, int begin, int end) {
    return push(slice_channels(value(x), begin, end), {x.id}, [begin, end](Tape& t, const Node& n) {
        const Tensor& in = t.nodes_[n.inputs[0]].value;
        Tensor g(in.shape());
        for (int b = 0; b < in.n(); ++b) {
            std::copy_n(n.grad.plane(b, 0), static_cast<std::size_t>(end - begin) * in.shape().plane(),
                        g.plane(b, begin));
        }
        t.accumulate(n.inputs[0], g);
    });
}

Var Tape::leaky_relu(Var x, float slope) {
    return push(efdn::leaky_relu(value(x), slope), {x.id}, [slope](Tape& t, const Node& n) {
        const Tensor& in = t.nodes_[n.inputs[0]].value;
        Tensor g = n.grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (in.data()[i] < 0.0f) {
                g.data()[i] *= slope;
            }
        }
        t.accumulate(n.inputs[0], g);
    });
}

Var Tape::pixel_shuffle(Var x, int r) {
    return push(efdn::pixel_shuffle(value(x), r), {x.id},
                [r](Tape& t, const Node& n) { t.accumulate(n.inputs[0], pixel_unshuffle(n.grad, r)); });
}

Var Tape::sum(Var x) {
    double acc = 0.0;
    for (float v : value(x).values()) {
        acc += v;
    }
    return push(scalar(acc), {x.id}, [](Tape& t, const Node& n) {
        t.accumulate(n.inputs[0], Tensor(t.nodes_[n.inputs[0]].value.shape(), n.grad.data()[0]));
    });
}

Var Tape::dot(Var x, const Tensor& weights) {
    const Tensor& in = value(x);
    if (in.shape() != weights.shape()) {
        throw DimensionError("tape dot: " + to_string(in.shape()) + " vs " + to_string(weights.shape()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        acc += static_cast<double>(in.data()[i]) * weights.data()[i];
    }
    return push(scalar(acc), {x.id},
                [weights](Tape& t, const Node& n) { t.accumulate(n.inputs[0], scaled(weights, n.grad.data()[0])); });
}

Var Tape::l1_loss(Var sr, const Tensor& hr) {
    LossGrad lg = l1_loss_grad(value(sr), hr);
    return push(scalar(lg.value), {sr.id}, [g = std::move(lg.grad)](Tape& t, const Node& n) {
        t.accumulate(n.inputs[0], scaled(g, n.grad.data()[0]));
    });
}

Var Tape::l2_loss(Var sr, const Tensor& hr) {
    LossGrad lg = l2_loss_grad(value(sr), hr);
    return push(scalar(lg.value), {sr.id}, [g = std::move(lg.grad)](Tape& t, const Node& n) {
        t.accumulate(n.inputs[0], scaled(g, n.grad.data()[0]));
    });
}

Var Tape::eg_loss(Var sr, const Tensor& hr, const LossConfig& cfg) {
    EgLossGrad lg = eg_loss_grad(value(sr), hr, cfg);
    last_eg_ = lg.value;
    return push(scalar(lg.value.total), {sr.id}, [g = std::move(lg.grad)](Tape& t, const Node& n) {
        t.accumulate(n.inputs[0], scaled(g, n.grad.data()[0]));
    });
}

void Tape::backward(Var root) {
    const Node& r = node(root);
    if (r.value.size() != 1) {
        throw UsageError("backward: root must be a scalar, got shape " + to_string(r.value.shape()));
    }
    for (Node& n : nodes_) {
        n.has_grad = false;
        n.grad = Tensor();
    }
    if (!r.requires_grad) {
        return;
    }
    nodes_[root.id].grad = Tensor(r.value.shape(), 1.0f);
    nodes_[root.id].has_grad = true;
    for (std::size_t i = root.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.has_grad || !n.backward) {
            continue;
        }
        n.backward(*this, n);
    }
}

Tensor Tape::grad(Var v) const {
    const Node& n = node(v);
    return n.has_grad ? n.grad : Tensor(n.value.shape());
}

std::span<const float> Tape::param_grad(const float* storage) const {
    const auto it = params_.find(storage);
    if (it == params_.end() || !nodes_[it->second].has_grad) {
        return {};
    }
    return nodes_[it->second].grad.values();
}

Var record_conv(Tape& tape, Var x, const ConvParams& p) { return record_conv(tape, x, p, p.pad_h, p.pad_w); }

Var record_conv(Tape& tape, Var x, const ConvParams& p, int pad_h, int pad_w) {
    p.validate();
    const Var w = tape.param(p.weight.values(), p.weight.shape());
    const Var b = tape.param(p.bias, bias_shape(p.bias.size()));
    return tape.conv2d(x, w, b, pad_h, pad_w);
}

Var record_edbb(Tape& tape, Var x, const EdbbParams& p) {
    p.validate();
    if (tape.value(x).c() != p.in_ch) {
        throw DimensionError("EDBB expects " + std::to_string(p.in_ch) + " input channels, got " +
                             std::to_string(tape.value(x).c()));
    }
    std::vector<Var> outs;
    for (const Branch& b : p.branches) {
        if (const auto* c3 = std::get_if<Conv3x3Branch>(&b)) {
            outs.push_back(record_conv(tape, x, c3->conv));
        } else if (const auto* c1 = std::get_if<Conv1x1Branch>(&b)) {
            outs.push_back(record_conv(tape, x, c1->conv));
        } else if (std::holds_alternative<IdentityBranch>(b)) {
            outs.push_back(x);
        } else if (const auto* es = std::get_if<ExpandSqueezeBranch>(&b)) {
            const Var mid = record_conv(tape, x, es->expand, es->squeeze.pad_h, es->squeeze.pad_w);
            outs.push_back(record_conv(tape, mid, es->squeeze, 0, 0));
        } else if (const auto* sf = std::get_if<ScaledFilterBranch>(&b)) {
            const Var mid = record_conv(tape, x, sf->pre, 1, 1);
            const Var s = tape.param(sf->scale, bias_shape(sf->scale.size()));
            const Var bias = tape.param(sf->bias, bias_shape(sf->bias.size()));
            outs.push_back(tape.scaled_depthwise3x3(mid, sf->filter, s, bias, 0));
        }
    }
    if (outs.empty()) {
        const Tensor& in = tape.value(x);
        return tape.constant(Tensor({in.n(), p.out_ch, in.h(), in.w()}));
    }
    Var sum = outs.front();
    for (std::size_t i = 1; i < outs.size(); ++i) {
        sum = tape.add(sum, outs[i]);
    }
    return sum;
}

Var record_model(Tape& tape, const Model& m, Var lr) {
    if (tape.value(lr).c() != 3) {
        throw DimensionError("network input must have 3 channels, got " + std::to_string(tape.value(lr).c()));
    }
    TapeOps ops{tape};
    return graph::run(ops, m, lr);
}

} // namespace efdn
