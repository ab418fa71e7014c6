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

#include "efdn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "efdn/error.hpp"

namespace efdn {

void adam_step(std::span<const ParamSlot> params, std::span<const std::span<const float>> grads, AdamState& state,
               double lr) {
    if (grads.size() != params.size()) {
        throw DimensionError("adam_step: " + std::to_string(grads.size()) + " gradients for " +
                             std::to_string(params.size()) + " parameters");
    }
    if (state.m.empty()) {
        for (const ParamSlot& p : params) {
            state.m.emplace_back(p.values.size(), 0.0f);
            state.v.emplace_back(p.values.size(), 0.0f);
        }
    }
    if (state.m.size() != params.size()) {
        throw DimensionError("adam_step: optimizer state tracks a different parameter set");
    }
    ++state.step;
    const AdamConfig& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        std::span<float> w = params[k].values;
        std::span<const float> g = grads[k];
        std::vector<float>& m = state.m[k];
        std::vector<float>& v = state.v[k];
        if (m.size() != w.size() || (!g.empty() && g.size() != w.size())) {
            throw DimensionError("adam_step: shape mismatch for " + params[k].name);
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g.empty() ? 0.0 : g[i];
            const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
            const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            const double update = lr * (mi / bc1) / (std::sqrt(vi / bc2) + c.eps);
            w[i] = static_cast<float>(w[i] - update);
        }
    }
}

double CosineSchedule::at(std::int64_t t) const noexcept {
    if (total_steps <= 0) {
        return lr0;
    }
    const double frac = static_cast<double>(std::clamp<std::int64_t>(t, 0, total_steps)) / total_steps;
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

} // namespace efdn
