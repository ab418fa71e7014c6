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

#include <array>
#include <optional>
#include <string_view>

namespace efdn {

/// Fixed 3x3 filters shared by the edge branches of the re-parameterizable
/// block and by the gradient-variance loss.
enum class FilterKind {
    sobel_x,
    sobel_y,
    laplacian,
    average,  // 1/9 box filter, the DBB-style "avgpool" ablation branch
};

/// Row-major 3x3 taps.
[[nodiscard]] const std::array<float, 9>& filter_taps(FilterKind kind) noexcept;

/// Short name: "sobel_x", "sobel_y", "laplacian", "average".
[[nodiscard]] std::string_view filter_name(FilterKind kind) noexcept;
[[nodiscard]] std::optional<FilterKind> parse_filter_name(std::string_view name) noexcept;

/// Stable identifier of the exact constants, stored in weight files
/// (e.g. "laplacian_4n" for the 4-neighbour Laplacian).
[[nodiscard]] std::string_view filter_constant_id(FilterKind kind) noexcept;
[[nodiscard]] std::optional<FilterKind> parse_filter_constant_id(std::string_view id) noexcept;

inline constexpr std::array<FilterKind, 3> kEdgeFilters = {FilterKind::sobel_x, FilterKind::sobel_y,
                                                           FilterKind::laplacian};

} // namespace efdn
