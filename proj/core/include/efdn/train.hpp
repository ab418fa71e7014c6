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
#include <vector>

#include "efdn/loss.hpp"
#include "efdn/network.hpp"
#include "efdn/tensor.hpp"

namespace efdn {

/// One LR/HR training pair, each (1, 3, h, w) with HR = scale x LR.
struct Sample {
    Tensor lr;
    Tensor hr;
};

enum class LossKind { l1, eg, l2 };

[[nodiscard]] std::string_view loss_kind_name(LossKind k) noexcept;
[[nodiscard]] std::optional<LossKind> parse_loss_kind(std::string_view s) noexcept;

struct StageConfig {
    std::string name = "stage";
    LossKind loss = LossKind::l1;
    double lr0 = 1e-3;
    double lr_min = 1e-6;
    int steps = 100;
    /// LR patch side; 0 trains on whole images.
    int crop = 16;
    int batch = 8;
    /// Gradient-variance patch side for eg stages.
    int patch = kDefaultPatch;
    /// Fixed trade-off weights. When absent they are derived from the model's
    /// edge-branch scales (or split evenly for models without edge branches).
    std::optional<Lambdas> lambdas;
    double lambda_total = kDefaultLambdaTotal;
    /// Re-parameterize the model before this stage starts.
    bool merge_first = false;
};

struct TrainConfig {
    std::vector<StageConfig> stages;
    std::uint64_t seed = 0;
    bool augment = true;
};

/// Parses the key = value stage format:
///
///   seed = 7
///   [stage pretrain]
///   loss = l1
///   lr = 1e-3
///   steps = 200
///
/// Keys per stage: loss, lr, lr_min, steps, crop, batch, patch, lambda_total,
/// lx, ly, ll (all three or none), merge. Lines starting with '#' are comments.
TrainConfig parse_train_config(std::string_view text);

struct StepRecord {
    int stage = 0;
    int step = 0;  // global step index
    double lr = 0.0;
    double loss = 0.0;
};

struct TrainResult {
    std::vector<StepRecord> curve;
    /// Loss configuration each stage actually used (lambdas resolved).
    std::vector<LossConfig> stage_loss;
};

/// Loss weights a stage uses on this model.
LossConfig resolve_loss_config(const StageConfig& stage, const Model& m);

/// Runs every stage with Adam and a per-stage cosine schedule. Minibatches are
/// seeded random crops with flip / 90-degree rotation augmentation.
TrainResult train_loop(Model& model, std::span<const Sample> dataset, const TrainConfig& cfg);

/// Mean loss of the model over whole samples (one forward per sample).
double evaluate_loss(const Model& model, std::span<const Sample> dataset, LossKind loss, const LossConfig& cfg);

double loss_value(LossKind kind, const Tensor& sr, const Tensor& hr, const LossConfig& cfg);

} // namespace efdn
