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
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "efdn/filters.hpp"
#include "efdn/tensor.hpp"

namespace efdn {

// Training-form branches of the edge-enhanced diverse branch block (EDBB).
// Every branch maps C input channels to O output channels and is linear, so
// the branch sum folds into one O x C x 3 x 3 convolution.

struct Conv3x3Branch {
    ConvParams conv;  // O x C x 3 x 3, pad 1
    friend bool operator==(const Conv3x3Branch&, const Conv3x3Branch&) = default;
};

struct Conv1x1Branch {
    ConvParams conv;  // O x C x 1 x 1, pad 0
    friend bool operator==(const Conv1x1Branch&, const Conv1x1Branch&) = default;
};

struct IdentityBranch {
    int channels = 0;
    friend bool operator==(const IdentityBranch&, const IdentityBranch&) = default;
};

struct ExpandSqueezeBranch {
    ConvParams expand;   // D x C x 1 x 1, pad 0
    ConvParams squeeze;  // O x D x 3 x 3, pad 1
    friend bool operator==(const ExpandSqueezeBranch&, const ExpandSqueezeBranch&) = default;
};

/// Pointwise conv followed by a fixed depthwise 3x3 filter with a learnable
/// per-channel scale and bias.
struct ScaledFilterBranch {
    FilterKind filter = FilterKind::sobel_x;
    ConvParams pre;            // O x C x 1 x 1, pad 0
    std::vector<float> scale;  // O
    std::vector<float> bias;   // O
    friend bool operator==(const ScaledFilterBranch&, const ScaledFilterBranch&) = default;
};

using Branch = std::variant<Conv3x3Branch, Conv1x1Branch, IdentityBranch, ExpandSqueezeBranch, ScaledFilterBranch>;

enum class BranchKind {
    conv3x3,
    conv1x1,
    identity,
    expand_squeeze,
    sobel_x,
    sobel_y,
    laplacian,
    avgpool,
};

[[nodiscard]] BranchKind kind_of(const Branch& b) noexcept;
[[nodiscard]] std::string_view branch_name(BranchKind kind) noexcept;
[[nodiscard]] std::optional<BranchKind> parse_branch_name(std::string_view name) noexcept;
/// Fixed filter used by a scaled-filter branch kind, if any.
[[nodiscard]] std::optional<FilterKind> branch_filter(BranchKind kind) noexcept;

/// The seven EDBB branches: 3x3, 1x1, identity, expand-squeeze, Sobel-x, Sobel-y, Laplacian.
[[nodiscard]] std::vector<BranchKind> edbb_branch_kinds();

/// Drops identity when C != O; every other kind is kept in order.
[[nodiscard]] std::vector<BranchKind> branch_kinds_for(int in_ch, int out_ch, std::span<const BranchKind> kinds);

struct EdbbParams {
    int in_ch = 0;
    int out_ch = 0;
    std::vector<Branch> branches;

    /// Throws ConfigError/DimensionError if any branch disagrees with (in_ch, out_ch).
    void validate() const;

    friend bool operator==(const EdbbParams&, const EdbbParams&) = default;
};

using MergedConv = ConvParams;

/// Expand-squeeze width for C input channels.
[[nodiscard]] constexpr int expand_width(int in_ch) noexcept { return 2 * in_ch; }

/// Random training-form block. Conv weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// scales 1, biases 0.
EdbbParams init_edbb(int in_ch, int out_ch, std::span<const BranchKind> kinds, std::mt19937_64& rng);

/// Zero-valued block with the given layout (used when loading weights).
EdbbParams zero_edbb(int in_ch, int out_ch, std::span<const BranchKind> kinds);

/// Plain conv with fan-in uniform init and zero bias, "same" padding.
ConvParams init_conv(int out_ch, int in_ch, int k, std::mt19937_64& rng);

// ---- merge algebra ----------------------------------------------------------

/// Zero-pads an h x w kernel to H x W, centred at ((H-h)/2, (W-w)/2). Bias unchanged.
ConvParams embed_kernel(const ConvParams& src, int target_h, int target_w);

/// 1x1 conv with the C x C identity matrix and zero bias.
ConvParams identity_as_conv(int channels);

/// Folds a pointwise conv followed by a K x K conv into one K x K conv.
///   W[o,c,i,j] = sum_d W2[o,d,i,j] W1[d,c]
///   b[o]       = sum_{d,i,j} W2[o,d,i,j] b1[d] + b2[o]
ConvParams merge_sequential(const ConvParams& first, const ConvParams& second);

/// Materializes the depthwise filter (diagonal slots scale[o] * F) as a full
/// O x O x 3 x 3 conv and folds it after `pre`.
ConvParams merge_scaled_filter(const ConvParams& pre, FilterKind filter, std::span<const float> scale,
                               std::span<const float> bias);

/// One branch as an O x C x 3 x 3 conv with pad 1.
ConvParams merge_branch(const Branch& branch, int in_ch, int out_ch);

/// Sum of every re-parameterized branch.
MergedConv merge_edbb(const EdbbParams& p);

// ---- training-form forward --------------------------------------------------

/// Pointwise `first` then K x K `second`, with the intermediate map padded by
/// first's response to zero input (its bias). This is the composition the
/// merged conv reproduces exactly, borders included.
Tensor sequential_forward(const Tensor& x, const ConvParams& first, const ConvParams& second);

Tensor branch_forward(const Tensor& x, const Branch& branch);

/// Sum of all branch outputs.
Tensor edbb_forward(const Tensor& x, const EdbbParams& p);

} // namespace efdn
