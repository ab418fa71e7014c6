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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "efdn/reparam.hpp"
#include "efdn/tensor.hpp"

namespace efdn {

enum class Arch {
    efdn,         // four EFDBs wired by the searched fusion topology
    fsrcnn_like,  // plain toy stack for ablations
    vdsr_like,    // deeper plain toy stack
};

enum class Mode {
    train,   // re-parameterizable units carry their branches
    deploy,  // every unit is a single conv
};

[[nodiscard]] std::string_view arch_name(Arch a) noexcept;
[[nodiscard]] std::optional<Arch> parse_arch(std::string_view s) noexcept;
[[nodiscard]] std::string_view mode_name(Mode m) noexcept;

inline constexpr float kActivationSlope = 0.05f;
inline constexpr int kEfdnBlocks = 4;

struct ModelSpec {
    Arch arch = Arch::efdn;
    int scale = 4;
    int width = 48;
    /// EFDB count for efdn (always 4); number of body convs for toy stacks.
    int depth = kEfdnBlocks;
    Mode mode = Mode::train;
    /// Branch layout of each re-parameterizable unit in train mode. Empty means
    /// plain 3x3 convs (the baseline).
    std::vector<BranchKind> branch_kinds;

    /// Throws ConfigError for odd widths, unsupported scales or duplicate branch kinds.
    void validate() const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

ModelSpec efdn_spec(int scale = 4, int width = 48, Mode mode = Mode::train);

enum class ToyKind { plain_fsrcnn_like, plain_vdsr_like };
enum class BlockKind { baseline_conv, edbb };
ModelSpec toy_spec(ToyKind kind, BlockKind block, int scale = 2);

/// One convolution site of the graph.
struct UnitDecl {
    std::string name;
    int in_ch = 0;
    int out_ch = 0;
    int kernel = 3;
    /// Becomes an EDBB in train mode when the ModelSpec lists branch kinds.
    bool reparam = false;
};

std::vector<UnitDecl> model_layout(const ModelSpec& spec);

using ConvUnit = std::variant<ConvParams, EdbbParams>;

struct NamedUnit {
    std::string name;
    ConvUnit unit;
};

/// A network instance: spec plus every named conv unit in layout order.
class Model {
public:
    Model(ModelSpec spec, std::vector<NamedUnit> units);

    [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::span<const NamedUnit> units() const noexcept { return units_; }
    [[nodiscard]] std::span<NamedUnit> units() noexcept { return units_; }

    [[nodiscard]] const ConvUnit& unit(std::string_view name) const;
    [[nodiscard]] ConvUnit& unit(std::string_view name);

private:
    ModelSpec spec_;
    std::vector<NamedUnit> units_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Random initialization (fan-in uniform convs, unit scales, zero biases).
Model build_model(const ModelSpec& spec, std::uint64_t seed);
/// All-zero parameters laid out for the given ModelSpec.
Model zero_model(const ModelSpec& spec);
Model build_toy_net(ToyKind kind, BlockKind block, int scale, std::uint64_t seed);

/// Folds every EDBB into its merged conv and flips the mode to deploy.
/// Throws UsageError("already merged") on a deploy-mode model.
Model merge_model(const Model& m);

// ---- execution --------------------------------------------------------------

Tensor apply_unit(const Tensor& x, const ConvUnit& unit);

/// One feature distillation block (1-based index as in the unit names).
Tensor efdb_forward(const Tensor& x, const Model& m, int block);

Tensor efdn_forward(const Tensor& lr, const Model& m);

/// Dispatches on the architecture. Input must have 3 channels.
Tensor model_forward(const Tensor& lr, const Model& m);

// ---- complexity -------------------------------------------------------------

[[nodiscard]] constexpr std::int64_t conv_param_count(std::int64_t out_ch, std::int64_t in_ch, std::int64_t kh,
                                                      std::int64_t kw) noexcept {
    return out_ch * in_ch * kh * kw + out_ch;
}

[[nodiscard]] constexpr std::int64_t conv_madds(std::int64_t out_ch, std::int64_t in_ch, std::int64_t kh,
                                                std::int64_t kw, std::int64_t out_h, std::int64_t out_w) noexcept {
    return out_ch * in_ch * kh * kw * out_h * out_w;
}

/// Deploy-form parameter count (every unit counted as its single conv).
std::int64_t count_params(const ModelSpec& spec);

/// Deploy-form multiply-adds for an SR output of out_h x out_w. Every conv runs
/// at LR resolution out / scale.
std::int64_t count_madds(const ModelSpec& spec, int out_h, int out_w);

/// Scalars actually stored in the model (train mode counts every branch).
std::int64_t count_trainable_params(const Model& m);

// ---- parameter access -------------------------------------------------------

struct ParamSlot {
    std::string name;
    std::vector<int> dims;
    std::span<float> values;
};

struct ParamView {
    std::string name;
    std::vector<int> dims;
    std::span<const float> values;
};

/// Every trainable tensor, in layout order. Spans stay valid while the model
/// is alive and not restructured.
std::vector<ParamSlot> parameter_slots(Model& m);
std::vector<ParamView> parameter_views(const Model& m);

/// Mean absolute scale of each edge branch kind across all EDBBs.
struct EdgeScales {
    double sobel_x = 0.0;
    double sobel_y = 0.0;
    double laplacian = 0.0;
    bool found = false;
};
EdgeScales mean_edge_scales(const Model& m);

// ---- graph wiring -----------------------------------------------------------

namespace graph {

/// Executes the graph for `m` with an executor providing
///   Value conv(const Value&, const ConvParams&)
///   Value edbb(const Value&, const EdbbParams&)
///   Value add(const Value&, const Value&)
///   Value concat(std::vector<Value>)
///   Value act(const Value&)
///   Value shuffle(const Value&, int r)
/// so that inference and autodiff share one topology.
template <class Ops>
typename Ops::Value unit(Ops& ops, const ConvUnit& u, const typename Ops::Value& x) {
    if (const auto* conv = std::get_if<ConvParams>(&u)) {
        return ops.conv(x, *conv);
    }
    return ops.edbb(x, std::get<EdbbParams>(u));
}

template <class Ops>
typename Ops::Value efdb(Ops& ops, const Model& m, int block, const typename Ops::Value& x) {
    using Value = typename Ops::Value;
    const std::string p = "blocks." + std::to_string(block) + ".";
    std::vector<Value> distilled;
    Value cur = x;
    for (int i = 1; i <= 3; ++i) {
        const std::string s = std::to_string(i);
        distilled.push_back(ops.act(unit(ops, m.unit(p + "distill" + s), cur)));
        cur = ops.act(ops.add(unit(ops, m.unit(p + "refine" + s), cur), cur));
    }
    distilled.push_back(ops.act(unit(ops, m.unit(p + "distill4"), cur)));
    return ops.add(unit(ops, m.unit(p + "fuse"), ops.concat(std::move(distilled))), x);
}

template <class Ops>
typename Ops::Value efdn(Ops& ops, const Model& m, const typename Ops::Value& lr) {
    using Value = typename Ops::Value;
    auto fuse = [&](const char* name, const Value& a, const Value& b) {
        return unit(ops, m.unit(name), ops.concat(std::vector<Value>{a, b}));
    };
    const Value f0 = unit(ops, m.unit("head"), lr);
    const Value f1 = efdb(ops, m, 1, f0);
    const Value f2 = efdb(ops, m, 2, f1);
    const Value f3 = efdb(ops, m, 3, fuse("fusion1", f1, f2));
    const Value h4 = efdb(ops, m, 4, fuse("fusion2", f2, f3));
    const Value f4 = ops.add(fuse("fusion3", f2, h4), f0);
    return ops.shuffle(unit(ops, m.unit("tail"), f4), m.spec().scale);
}

template <class Ops>
typename Ops::Value plain_stack(Ops& ops, const Model& m, const typename Ops::Value& lr) {
    using Value = typename Ops::Value;
    Value cur = ops.act(unit(ops, m.unit("head"), lr));
    for (int i = 1; i <= m.spec().depth; ++i) {
        cur = ops.act(unit(ops, m.unit("body." + std::to_string(i)), cur));
    }
    return ops.shuffle(unit(ops, m.unit("tail"), cur), m.spec().scale);
}

template <class Ops>
typename Ops::Value run(Ops& ops, const Model& m, const typename Ops::Value& lr) {
    if (m.spec().arch == Arch::efdn) {
        return efdn(ops, m, lr);
    }
    return plain_stack(ops, m, lr);
}

} // namespace graph

} // namespace efdn
