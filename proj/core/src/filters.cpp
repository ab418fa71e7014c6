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

#include "efdn/filters.hpp"

namespace efdn {

namespace {

constexpr std::array<float, 9> kSobelX = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
constexpr std::array<float, 9> kSobelY = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
constexpr std::array<float, 9> kLaplacian = {0, 1, 0, 1, -4, 1, 0, 1, 0};
constexpr float kNinth = 1.0f / 9.0f;
constexpr std::array<float, 9> kAverage = {kNinth, kNinth, kNinth, kNinth, kNinth,
                                           kNinth, kNinth, kNinth, kNinth};

constexpr std::array<FilterKind, 4> kAll = {FilterKind::sobel_x, FilterKind::sobel_y, FilterKind::laplacian,
                                            FilterKind::average};

} // namespace

const std::array<float, 9>& filter_taps(FilterKind kind) noexcept {
    switch (kind) {
    case FilterKind::sobel_x:
        return kSobelX;
    case FilterKind::sobel_y:
        return kSobelY;
    case FilterKind::laplacian:
        return kLaplacian;
    case FilterKind::average:
        break;
    }
    return kAverage;
}

std::string_view filter_name(FilterKind kind) noexcept {
    switch (kind) {
    case FilterKind::sobel_x:
        return "sobel_x";
    case FilterKind::sobel_y:
        return "sobel_y";
    case FilterKind::laplacian:
        return "laplacian";
    case FilterKind::average:
        break;
    }
    return "average";
}

std::optional<FilterKind> parse_filter_name(std::string_view name) noexcept {
    for (FilterKind k : kAll) {
        if (filter_name(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::string_view filter_constant_id(FilterKind kind) noexcept {
    switch (kind) {
    case FilterKind::sobel_x:
        return "sobel_x_3x3";
    case FilterKind::sobel_y:
        return "sobel_y_3x3";
    case FilterKind::laplacian:
        return "laplacian_4n";
    case FilterKind::average:
        break;
    }
    return "box_3x3";
}

std::optional<FilterKind> parse_filter_constant_id(std::string_view id) noexcept {
    for (FilterKind k : kAll) {
        if (filter_constant_id(k) == id) {
            return k;
        }
    }
    return std::nullopt;
}

} // namespace efdn
