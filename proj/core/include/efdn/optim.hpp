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
#include <span>
#include <vector>

#include "efdn/network.hpp"

namespace efdn {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment estimates, one buffer per parameter slot.
struct AdamState {
    AdamConfig config;
    std::int64_t step = 0;
    std::vector<std::vector<float>> m;
    std::vector<std::vector<float>> v;
};

/// One bias-corrected Adam update. grads[i] may be empty, meaning zero gradient
/// for params[i]. Moments are allocated lazily on the first call.
void adam_step(std::span<const ParamSlot> params, std::span<const std::span<const float>> grads, AdamState& state,
               double lr);

/// lr(t) = lr_min + (lr0 - lr_min) * (1 + cos(pi * t / T)) / 2, t clamped to [0, T].
struct CosineSchedule {
    double lr0 = 1e-3;
    double lr_min = 0.0;
    std::int64_t total_steps = 1;

    [[nodiscard]] double at(std::int64_t t) const noexcept;
};

} // namespace efdn
