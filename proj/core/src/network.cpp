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

#include "efdn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "efdn/error.hpp"

namespace efdn {

namespace {

struct TensorOps {
    using Value = Tensor;

    Tensor conv(const Tensor& x, const ConvParams& p) { return conv2d(x, p); }
    Tensor edbb(const Tensor& x, const EdbbParams& p) { return edbb_forward(x, p); }
    Tensor add(const Tensor& a, const Tensor& b) { return efdn::add(a, b); }
    Tensor concat(std::vector<Tensor> parts) {
        std::vector<const Tensor*> ptrs;
        ptrs.reserve(parts.size());
        for (const Tensor& t : parts) {
            ptrs.push_back(&t);
        }
        return concat_channels(ptrs);
    }
    Tensor act(const Tensor& x) { return leaky_relu(x, kActivationSlope); }
    Tensor shuffle(const Tensor& x, int r) { return pixel_shuffle(x, r); }
};

void require_rgb(const Tensor& lr) {
    if (lr.c() != 3) {
        throw DimensionError("network input must have 3 channels, got " + std::to_string(lr.c()));
    }
}

std::vector<int> conv_dims(const ConvParams& p) { return {p.out_ch(), p.in_ch(), p.kh(), p.kw()}; }

template <class Fn>
void visit_conv_params(const std::string& prefix, ConvParams& p, Fn&& fn) {
    fn(prefix + ".weight", conv_dims(p), p.weight.values());
    fn(prefix + ".bias", std::vector<int>{p.out_ch()}, std::span<float>(p.bias));
}

template <class Fn>
void visit_unit_params(const std::string& name, ConvUnit& unit, Fn&& fn) {
    if (auto* conv = std::get_if<ConvParams>(&unit)) {
        visit_conv_params(name, *conv, fn);
        return;
    }
    auto& edbb = std::get<EdbbParams>(unit);
    for (Branch& b : edbb.branches) {
        const std::string p = name + "." + std::string(branch_name(kind_of(b)));
        if (auto* br = std::get_if<Conv3x3Branch>(&b)) {
            visit_conv_params(p, br->conv, fn);
        } else if (auto* br1 = std::get_if<Conv1x1Branch>(&b)) {
            visit_conv_params(p, br1->conv, fn);
        } else if (auto* es = std::get_if<ExpandSqueezeBranch>(&b)) {
            visit_conv_params(p + ".expand", es->expand, fn);
            visit_conv_params(p + ".squeeze", es->squeeze, fn);
        } else if (auto* sf = std::get_if<ScaledFilterBranch>(&b)) {
            visit_conv_params(p + ".pre", sf->pre, fn);
            fn(p + ".scale", std::vector<int>{static_cast<int>(sf->scale.size())}, std::span<float>(sf->scale));
            fn(p + ".bias", std::vector<int>{static_cast<int>(sf->bias.size())}, std::span<float>(sf->bias));
        }
    }
}

Model make_model(const ModelSpec& spec, std::mt19937_64* rng) {
    spec.validate();
    std::vector<NamedUnit> units;
    for (const UnitDecl& d : model_layout(spec)) {
        const bool as_edbb = d.reparam && spec.mode == Mode::train && !spec.branch_kinds.empty();
        if (as_edbb) {
            const auto kinds = branch_kinds_for(d.in_ch, d.out_ch, spec.branch_kinds);
            units.push_back({d.name, rng ? init_edbb(d.in_ch, d.out_ch, kinds, *rng)
                                         : zero_edbb(d.in_ch, d.out_ch, kinds)});
        } else {
            units.push_back({d.name, rng ? init_conv(d.out_ch, d.in_ch, d.kernel, *rng)
                                         : ConvParams::zeros(d.out_ch, d.in_ch, d.kernel, d.kernel)});
        }
    }
    return Model(spec, std::move(units));
}

} // namespace

std::string_view arch_name(Arch a) noexcept {
    switch (a) {
    case Arch::efdn:
        return "efdn";
    case Arch::fsrcnn_like:
        return "fsrcnn_like";
    case Arch::vdsr_like:
        break;
    }
    return "vdsr_like";
}

std::optional<Arch> parse_arch(std::string_view s) noexcept {
    for (Arch a : {Arch::efdn, Arch::fsrcnn_like, Arch::vdsr_like}) {
        if (arch_name(a) == s) {
            return a;
        }
    }
    return std::nullopt;
}

std::string_view mode_name(Mode m) noexcept { return m == Mode::train ? "train" : "deploy"; }

void ModelSpec::validate() const {
    if (scale < 1 || scale > 8) {
        throw ConfigError("scale must be in [1, 8], got " + std::to_string(scale));
    }
    if (width < 2 || width % 2 != 0) {
        throw ConfigError("width must be even and >= 2, got " + std::to_string(width));
    }
    if (arch == Arch::efdn && depth != kEfdnBlocks) {
        throw ConfigError("efdn topology has exactly " + std::to_string(kEfdnBlocks) + " blocks");
    }
    if (depth < 1) {
        throw ConfigError("depth must be >= 1");
    }
    std::set<BranchKind> seen;
    for (BranchKind k : branch_kinds) {
        if (!seen.insert(k).second) {
            throw ConfigError("duplicate branch kind " + std::string(branch_name(k)));
        }
    }
}

ModelSpec efdn_spec(int scale, int width, Mode mode) {
    return ModelSpec{Arch::efdn, scale, width, kEfdnBlocks, mode, edbb_branch_kinds()};
}

ModelSpec toy_spec(ToyKind kind, BlockKind block, int scale) {
    ModelSpec s;
    s.arch = kind == ToyKind::plain_fsrcnn_like ? Arch::fsrcnn_like : Arch::vdsr_like;
    s.scale = scale;
    s.width = kind == ToyKind::plain_fsrcnn_like ? 16 : 32;
    s.depth = kind == ToyKind::plain_fsrcnn_like ? 4 : 6;
    s.mode = Mode::train;
    if (block == BlockKind::edbb) {
        s.branch_kinds = edbb_branch_kinds();
    }
    return s;
}

std::vector<UnitDecl> model_layout(const ModelSpec& spec) {
    const int C = spec.width;
    const int tail_out = 3 * spec.scale * spec.scale;
    std::vector<UnitDecl> out;
    out.push_back({"head", 3, C, 3, false});
    if (spec.arch == Arch::efdn) {
        const int dc = C / 2;
        for (int b = 1; b <= kEfdnBlocks; ++b) {
            const std::string p = "blocks." + std::to_string(b) + ".";
            for (int i = 1; i <= 3; ++i) {
                out.push_back({p + "distill" + std::to_string(i), C, dc, 1, false});
                out.push_back({p + "refine" + std::to_string(i), C, C, 3, true});
            }
            out.push_back({p + "distill4", C, dc, 3, true});
            out.push_back({p + "fuse", 4 * dc, C, 1, false});
        }
        for (int f = 1; f <= 3; ++f) {
            out.push_back({"fusion" + std::to_string(f), 2 * C, C, 1, false});
        }
    } else {
        for (int i = 1; i <= spec.depth; ++i) {
            out.push_back({"body." + std::to_string(i), C, C, 3, true});
        }
    }
    out.push_back({"tail", C, tail_out, 3, false});
    return out;
}

Model::Model(ModelSpec spec, std::vector<NamedUnit> units) : spec_(std::move(spec)), units_(std::move(units)) {
    for (std::size_t i = 0; i < units_.size(); ++i) {
        if (!index_.emplace(units_[i].name, i).second) {
            throw ConfigError("duplicate unit name " + units_[i].name);
        }
    }
}

const ConvUnit& Model::unit(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) {
        throw ConfigError("model has no unit named " + std::string(name));
    }
    return units_[it->second].unit;
}

ConvUnit& Model::unit(std::string_view name) {
    return const_cast<ConvUnit&>(static_cast<const Model&>(*this).unit(name));
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return make_model(spec, &rng);
}

Model zero_model(const ModelSpec& spec) { return make_model(spec, nullptr); }

Model build_toy_net(ToyKind kind, BlockKind block, int scale, std::uint64_t seed) {
    return build_model(toy_spec(kind, block, scale), seed);
}

Model merge_model(const Model& m) {
    if (m.spec().mode == Mode::deploy) {
        throw UsageError("already merged");
    }
    ModelSpec spec = m.spec();
    spec.mode = Mode::deploy;
    std::vector<NamedUnit> units;
    for (const NamedUnit& u : m.units()) {
        if (const auto* edbb = std::get_if<EdbbParams>(&u.unit)) {
            units.push_back({u.name, merge_edbb(*edbb)});
        } else {
            units.push_back(u);
        }
    }
    return Model(std::move(spec), std::move(units));
}

Tensor apply_unit(const Tensor& x, const ConvUnit& unit) {
    TensorOps ops;
    return graph::unit(ops, unit, x);
}

Tensor efdb_forward(const Tensor& x, const Model& m, int block) {
    if (m.spec().arch != Arch::efdn) {
        throw ConfigError("efdb_forward requires an efdn model");
    }
    if (block < 1 || block > kEfdnBlocks) {
        throw ConfigError("block index out of range: " + std::to_string(block));
    }
    if (x.c() != m.spec().width) {
        throw DimensionError("EFDB expects " + std::to_string(m.spec().width) + " channels, got " +
                             std::to_string(x.c()));
    }
    TensorOps ops;
    return graph::efdb(ops, m, block, x);
}

Tensor efdn_forward(const Tensor& lr, const Model& m) {
    if (m.spec().arch != Arch::efdn) {
        throw ConfigError("efdn_forward requires an efdn model");
    }
    require_rgb(lr);
    TensorOps ops;
    return graph::efdn(ops, m, lr);
}

Tensor model_forward(const Tensor& lr, const Model& m) {
    require_rgb(lr);
    TensorOps ops;
    return graph::run(ops, m, lr);
}

std::int64_t count_params(const ModelSpec& spec) {
    std::int64_t total = 0;
    for (const UnitDecl& d : model_layout(spec)) {
        total += conv_param_count(d.out_ch, d.in_ch, d.kernel, d.kernel);
    }
    return total;
}

std::int64_t count_madds(const ModelSpec& spec, int out_h, int out_w) {
    if (out_h % spec.scale != 0 || out_w % spec.scale != 0) {
        throw InputError("output size " + std::to_string(out_w) + "x" + std::to_string(out_h) +
                         " is not divisible by scale " + std::to_string(spec.scale));
    }
    const std::int64_t h = out_h / spec.scale, w = out_w / spec.scale;
    std::int64_t total = 0;
    for (const UnitDecl& d : model_layout(spec)) {
        total += conv_madds(d.out_ch, d.in_ch, d.kernel, d.kernel, h, w);
    }
    return total;
}

std::int64_t count_trainable_params(const Model& m) {
    std::int64_t total = 0;
    for (const ParamView& v : parameter_views(m)) {
        total += static_cast<std::int64_t>(v.values.size());
    }
    return total;
}

std::vector<ParamSlot> parameter_slots(Model& m) {
    std::vector<ParamSlot> slots;
    for (NamedUnit& u : m.units()) {
        visit_unit_params(u.name, u.unit, [&](std::string name, std::vector<int> dims, std::span<float> values) {
            slots.push_back({std::move(name), std::move(dims), values});
        });
    }
    return slots;
}

std::vector<ParamView> parameter_views(const Model& m) {
    std::vector<ParamView> views;
    for (ParamSlot& s : parameter_slots(const_cast<Model&>(m))) {
        views.push_back({std::move(s.name), std::move(s.dims), s.values});
    }
    return views;
}

EdgeScales mean_edge_scales(const Model& m) {
    double sum[3] = {0, 0, 0};
    std::size_t count[3] = {0, 0, 0};
    for (const NamedUnit& u : m.units()) {
        const auto* edbb = std::get_if<EdbbParams>(&u.unit);
        if (edbb == nullptr) {
            continue;
        }
        for (const Branch& b : edbb->branches) {
            const auto* sf = std::get_if<ScaledFilterBranch>(&b);
            if (sf == nullptr || sf->filter == FilterKind::average) {
                continue;
            }
            const int k = static_cast<int>(sf->filter);
            for (float s : sf->scale) {
                sum[k] += std::abs(s);
            }
            count[k] += sf->scale.size();
        }
    }
    EdgeScales out;
    auto mean = [&](int k) { return count[k] ? sum[k] / static_cast<double>(count[k]) : 0.0; };
    out.sobel_x = mean(static_cast<int>(FilterKind::sobel_x));
    out.sobel_y = mean(static_cast<int>(FilterKind::sobel_y));
    out.laplacian = mean(static_cast<int>(FilterKind::laplacian));
    out.found = count[0] + count[1] + count[2] > 0;
    return out;
}

} // namespace efdn
