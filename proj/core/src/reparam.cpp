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

#include "efdn/reparam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "efdn/error.hpp"

namespace efdn {

namespace {

constexpr std::array<BranchKind, 8> kAllKinds = {
    BranchKind::conv3x3, BranchKind::conv1x1, BranchKind::identity, BranchKind::expand_squeeze,
    BranchKind::sobel_x, BranchKind::sobel_y, BranchKind::laplacian, BranchKind::avgpool,
};

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

void fill_uniform(Tensor& t, float bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (float& v : t.values()) {
        v = dist(rng);
    }
}

void require_pointwise(const ConvParams& p, const char* what) {
    if (p.kh() != 1 || p.kw() != 1) {
        throw ConfigError(std::string(what) + ": expected a 1x1 conv, got " + std::to_string(p.kh()) + "x" +
                          std::to_string(p.kw()) + " (only pointwise-first sequences are supported)");
    }
}

ConvParams with_padding(ConvParams p, int pad_h, int pad_w) {
    p.pad_h = pad_h;
    p.pad_w = pad_w;
    return p;
}

Branch make_branch(BranchKind kind, int in_ch, int out_ch) {
    switch (kind) {
    case BranchKind::conv3x3:
        return Conv3x3Branch{ConvParams::zeros(out_ch, in_ch, 3, 3)};
    case BranchKind::conv1x1:
        return Conv1x1Branch{ConvParams::zeros(out_ch, in_ch, 1, 1)};
    case BranchKind::identity:
        if (in_ch != out_ch) {
            throw ConfigError("identity branch requires in_ch == out_ch (" + std::to_string(in_ch) +
                              " != " + std::to_string(out_ch) + ")");
        }
        return IdentityBranch{in_ch};
    case BranchKind::expand_squeeze: {
        const int d = expand_width(in_ch);
        return ExpandSqueezeBranch{ConvParams::zeros(d, in_ch, 1, 1), ConvParams::zeros(out_ch, d, 3, 3)};
    }
    case BranchKind::sobel_x:
    case BranchKind::sobel_y:
    case BranchKind::laplacian:
    case BranchKind::avgpool:
        return ScaledFilterBranch{*branch_filter(kind), ConvParams::zeros(out_ch, in_ch, 1, 1),
                                  std::vector<float>(static_cast<std::size_t>(out_ch), 0.0f),
                                  std::vector<float>(static_cast<std::size_t>(out_ch), 0.0f)};
    }
    throw ConfigError("unknown branch kind");
}

} // namespace

BranchKind kind_of(const Branch& b) noexcept {
    return std::visit(Overloaded{
                          [](const Conv3x3Branch&) { return BranchKind::conv3x3; },
                          [](const Conv1x1Branch&) { return BranchKind::conv1x1; },
                          [](const IdentityBranch&) { return BranchKind::identity; },
                          [](const ExpandSqueezeBranch&) { return BranchKind::expand_squeeze; },
                          [](const ScaledFilterBranch& s) {
                              switch (s.filter) {
                              case FilterKind::sobel_x:
                                  return BranchKind::sobel_x;
                              case FilterKind::sobel_y:
                                  return BranchKind::sobel_y;
                              case FilterKind::laplacian:
                                  return BranchKind::laplacian;
                              case FilterKind::average:
                                  break;
                              }
                              return BranchKind::avgpool;
                          },
                      },
                      b);
}

std::string_view branch_name(BranchKind kind) noexcept {
    switch (kind) {
    case BranchKind::conv3x3:
        return "conv3x3";
    case BranchKind::conv1x1:
        return "conv1x1";
    case BranchKind::identity:
        return "identity";
    case BranchKind::expand_squeeze:
        return "expand_squeeze";
    case BranchKind::sobel_x:
        return "sobel_x";
    case BranchKind::sobel_y:
        return "sobel_y";
    case BranchKind::laplacian:
        return "laplacian";
    case BranchKind::avgpool:
        break;
    }
    return "avgpool";
}

std::optional<BranchKind> parse_branch_name(std::string_view name) noexcept {
    for (BranchKind k : kAllKinds) {
        if (branch_name(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<FilterKind> branch_filter(BranchKind kind) noexcept {
    switch (kind) {
    case BranchKind::sobel_x:
        return FilterKind::sobel_x;
    case BranchKind::sobel_y:
        return FilterKind::sobel_y;
    case BranchKind::laplacian:
        return FilterKind::laplacian;
    case BranchKind::avgpool:
        return FilterKind::average;
    default:
        return std::nullopt;
    }
}

std::vector<BranchKind> edbb_branch_kinds() {
    return {BranchKind::conv3x3, BranchKind::conv1x1, BranchKind::identity, BranchKind::expand_squeeze,
            BranchKind::sobel_x, BranchKind::sobel_y, BranchKind::laplacian};
}

std::vector<BranchKind> branch_kinds_for(int in_ch, int out_ch, std::span<const BranchKind> kinds) {
    std::vector<BranchKind> out;
    for (BranchKind k : kinds) {
        if (k == BranchKind::identity && in_ch != out_ch) {
            continue;
        }
        out.push_back(k);
    }
    return out;
}

void EdbbParams::validate() const {
    if (in_ch < 1 || out_ch < 1) {
        throw ConfigError("EDBB channel counts must be >= 1");
    }
    auto check = [&](const ConvParams& p, int o, int c, int k, const char* what) {
        p.validate();
        if (p.out_ch() != o || p.in_ch() != c || p.kh() != k || p.kw() != k) {
            throw DimensionError(std::string("EDBB ") + what + " has shape " + to_string(p.weight.shape()) +
                                 ", expected (" + std::to_string(o) + ", " + std::to_string(c) + ", " +
                                 std::to_string(k) + ", " + std::to_string(k) + ")");
        }
    };
    for (const Branch& b : branches) {
        std::visit(Overloaded{
                       [&](const Conv3x3Branch& br) { check(br.conv, out_ch, in_ch, 3, "conv3x3"); },
                       [&](const Conv1x1Branch& br) { check(br.conv, out_ch, in_ch, 1, "conv1x1"); },
                       [&](const IdentityBranch& br) {
                           if (in_ch != out_ch || br.channels != in_ch) {
                               throw ConfigError("identity branch requires in_ch == out_ch (" +
                                                 std::to_string(in_ch) + " vs " + std::to_string(out_ch) + ")");
                           }
                       },
                       [&](const ExpandSqueezeBranch& br) {
                           check(br.expand, br.expand.out_ch(), in_ch, 1, "expand");
                           check(br.squeeze, out_ch, br.expand.out_ch(), 3, "squeeze");
                       },
                       [&](const ScaledFilterBranch& br) {
                           check(br.pre, out_ch, in_ch, 1, "scaled-filter pre");
                           if (br.scale.size() != static_cast<std::size_t>(out_ch) ||
                               br.bias.size() != static_cast<std::size_t>(out_ch)) {
                               throw DimensionError("scaled-filter scale/bias must have out_ch entries");
                           }
                       },
                   },
                   b);
    }
}

ConvParams init_conv(int out_ch, int in_ch, int k, std::mt19937_64& rng) {
    ConvParams p = ConvParams::zeros(out_ch, in_ch, k, k);
    fill_uniform(p.weight, 1.0f / std::sqrt(static_cast<float>(in_ch * k * k)), rng);
    return p;
}

EdbbParams zero_edbb(int in_ch, int out_ch, std::span<const BranchKind> kinds) {
    EdbbParams p{in_ch, out_ch, {}};
    for (BranchKind k : kinds) {
        p.branches.push_back(make_branch(k, in_ch, out_ch));
    }
    return p;
}

EdbbParams init_edbb(int in_ch, int out_ch, std::span<const BranchKind> kinds, std::mt19937_64& rng) {
    EdbbParams p = zero_edbb(in_ch, out_ch, kinds);
    // Branch outputs are summed, so each branch gets 1/sqrt(branches) of the usual bound.
    const float share = 1.0f / std::sqrt(static_cast<float>(std::max<std::size_t>(p.branches.size(), 1)));
    auto init = [&](ConvParams& c, float gain = 1.0f) {
        fill_uniform(c.weight, gain * share / std::sqrt(static_cast<float>(c.in_ch() * c.kh() * c.kw())), rng);
    };
    for (Branch& b : p.branches) {
        std::visit(Overloaded{
                       [&](Conv3x3Branch& br) { init(br.conv); },
                       [&](Conv1x1Branch& br) { init(br.conv); },
                       [](IdentityBranch&) {},
                       [&](ExpandSqueezeBranch& br) {
                           init(br.expand);
                           init(br.squeeze);
                       },
                       [&](ScaledFilterBranch& br) {
                           float norm = 0.0f;
                           for (float t : filter_taps(br.filter)) {
                               norm += t * t;
                           }
                           init(br.pre, 1.0f / std::sqrt(norm));
                           std::fill(br.scale.begin(), br.scale.end(), 1.0f);
                       },
                   },
                   b);
    }
    return p;
}

ConvParams embed_kernel(const ConvParams& src, int target_h, int target_w) {
    src.validate();
    if (target_h % 2 == 0 || target_w % 2 == 0) {
        throw ConfigError("embed_kernel: target size must be odd");
    }
    if (src.kh() > target_h || src.kw() > target_w) {
        throw DimensionError("embed_kernel: " + std::to_string(src.kh()) + "x" + std::to_string(src.kw()) +
                             " kernel does not fit in " + std::to_string(target_h) + "x" + std::to_string(target_w));
    }
    const int oy = (target_h - src.kh()) / 2;
    const int ox = (target_w - src.kw()) / 2;
    ConvParams out;
    out.weight = Tensor({src.out_ch(), src.in_ch(), target_h, target_w});
    out.bias = src.bias;
    out.pad_h = target_h / 2;
    out.pad_w = target_w / 2;
    for (int o = 0; o < src.out_ch(); ++o) {
        for (int c = 0; c < src.in_ch(); ++c) {
            for (int i = 0; i < src.kh(); ++i) {
                for (int j = 0; j < src.kw(); ++j) {
                    out.weight.at(o, c, i + oy, j + ox) = src.weight.at(o, c, i, j);
                }
            }
        }
    }
    return out;
}

ConvParams identity_as_conv(int channels) {
    if (channels < 1) {
        throw ConfigError("identity_as_conv: channels must be >= 1");
    }
    ConvParams p = ConvParams::zeros(channels, channels, 1, 1);
    for (int c = 0; c < channels; ++c) {
        p.weight.at(c, c, 0, 0) = 1.0f;
    }
    return p;
}

ConvParams merge_sequential(const ConvParams& first, const ConvParams& second) {
    first.validate();
    second.validate();
    require_pointwise(first, "merge_sequential");
    if (first.out_ch() != second.in_ch()) {
        throw DimensionError("merge_sequential: first produces " + std::to_string(first.out_ch()) +
                             " channels, second expects " + std::to_string(second.in_ch()));
    }
    const int O = second.out_ch(), D = first.out_ch(), C = first.in_ch();
    const int KH = second.kh(), KW = second.kw();
    ConvParams out;
    out.weight = Tensor({O, C, KH, KW});
    out.bias.assign(static_cast<std::size_t>(O), 0.0f);
    out.pad_h = KH / 2;
    out.pad_w = KW / 2;
    for (int o = 0; o < O; ++o) {
        double bias = second.bias[o];
        for (int d = 0; d < D; ++d) {
            const float* w2 = second.weight.plane(o, d);
            double tap_sum = 0.0;
            for (int t = 0; t < KH * KW; ++t) {
                tap_sum += w2[t];
            }
            bias += tap_sum * first.bias[d];
            for (int c = 0; c < C; ++c) {
                const float w1 = first.weight.at(d, c, 0, 0);
                if (w1 == 0.0f) {
                    continue;
                }
                float* dst = out.weight.plane(o, c);
                for (int t = 0; t < KH * KW; ++t) {
                    dst[t] += w2[t] * w1;
                }
            }
        }
        out.bias[o] = static_cast<float>(bias);
    }
    return out;
}

ConvParams merge_scaled_filter(const ConvParams& pre, FilterKind filter, std::span<const float> scale,
                               std::span<const float> bias) {
    pre.validate();
    require_pointwise(pre, "merge_scaled_filter");
    const int O = pre.out_ch();
    if (scale.size() != static_cast<std::size_t>(O) || bias.size() != static_cast<std::size_t>(O)) {
        throw DimensionError("merge_scaled_filter: scale/bias length must equal " + std::to_string(O));
    }
    const auto& taps = filter_taps(filter);
    ConvParams depthwise = ConvParams::zeros(O, O, 3, 3);
    for (int o = 0; o < O; ++o) {
        float* dst = depthwise.weight.plane(o, o);
        for (int t = 0; t < 9; ++t) {
            dst[t] = scale[o] * taps[t];
        }
        depthwise.bias[o] = bias[o];
    }
    return merge_sequential(pre, depthwise);
}

ConvParams merge_branch(const Branch& branch, int in_ch, int out_ch) {
    return std::visit(Overloaded{
                          [](const Conv3x3Branch& b) { return embed_kernel(b.conv, 3, 3); },
                          [](const Conv1x1Branch& b) { return embed_kernel(b.conv, 3, 3); },
                          [&](const IdentityBranch&) {
                              if (in_ch != out_ch) {
                                  throw ConfigError("identity branch requires in_ch == out_ch");
                              }
                              return embed_kernel(identity_as_conv(in_ch), 3, 3);
                          },
                          [](const ExpandSqueezeBranch& b) { return merge_sequential(b.expand, b.squeeze); },
                          [](const ScaledFilterBranch& b) {
                              return merge_scaled_filter(b.pre, b.filter, b.scale, b.bias);
                          },
                      },
                      branch);
}

MergedConv merge_edbb(const EdbbParams& p) {
    p.validate();
    MergedConv merged = ConvParams::zeros(p.out_ch, p.in_ch, 3, 3);
    for (const Branch& b : p.branches) {
        const ConvParams part = merge_branch(b, p.in_ch, p.out_ch);
        float* dst = merged.weight.data();
        const float* src = part.weight.data();
        for (std::size_t i = 0; i < merged.weight.size(); ++i) {
            dst[i] += src[i];
        }
        for (int o = 0; o < p.out_ch; ++o) {
            merged.bias[o] += part.bias[o];
        }
    }
    return merged;
}

Tensor sequential_forward(const Tensor& x, const ConvParams& first, const ConvParams& second) {
    require_pointwise(first, "sequential_forward");
    const Tensor mid = conv2d(x, with_padding(first, second.pad_h, second.pad_w));
    return conv2d(mid, with_padding(second, 0, 0));
}

Tensor branch_forward(const Tensor& x, const Branch& branch) {
    return std::visit(Overloaded{
                          [&](const Conv3x3Branch& b) { return conv2d(x, b.conv); },
                          [&](const Conv1x1Branch& b) { return conv2d(x, b.conv); },
                          [&](const IdentityBranch&) { return x; },
                          [&](const ExpandSqueezeBranch& b) { return sequential_forward(x, b.expand, b.squeeze); },
                          [&](const ScaledFilterBranch& b) {
                              const Tensor mid = conv2d(x, with_padding(b.pre, 1, 1));
                              return scaled_depthwise3x3(mid, filter_taps(b.filter), b.scale, b.bias, 0);
                          },
                      },
                      branch);
}

Tensor edbb_forward(const Tensor& x, const EdbbParams& p) {
    p.validate();
    if (x.c() != p.in_ch) {
        throw DimensionError("EDBB expects " + std::to_string(p.in_ch) + " input channels, got " +
                             std::to_string(x.c()));
    }
    if (p.branches.empty()) {
        return Tensor({x.n(), p.out_ch, x.h(), x.w()});
    }
    Tensor sum = branch_forward(x, p.branches.front());
    for (std::size_t i = 1; i < p.branches.size(); ++i) {
        sum = add(sum, branch_forward(x, p.branches[i]));
    }
    return sum;
}

} // namespace efdn
