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

#include <span>
#include <vector>

#include "efdn/filters.hpp"
#include "efdn/tensor.hpp"

namespace efdn {

inline constexpr int kDefaultPatch = 8;
inline constexpr double kDefaultLambdaTotal = 0.03;

/// Patch side and trade-off weights of the edge-enhanced gradient-variance loss
///   L_EG = L1 + lambda_x * L_x + lambda_y * L_y + lambda_l * L_l
struct LossConfig {
    int patch = kDefaultPatch;
    double lambda_x = kDefaultLambdaTotal / 3.0;
    double lambda_y = kDefaultLambdaTotal / 3.0;
    double lambda_l = kDefaultLambdaTotal / 3.0;

    void validate() const;
};

/// Unbiased per-patch variances of a gradient map, patches in row-major order.
struct VarianceMap {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
};

/// BT.601 full-range luma on [0, 1] data: 0.299 R + 0.587 G + 0.114 B.
Tensor to_gray(const Tensor& img);

/// Fixed-filter response with zero padding 1; same spatial size, one channel.
Tensor gradient_map(const Tensor& gray, FilterKind filter);

/// Non-overlapping n x n patches over the centre crop whose sides are the
/// largest multiples of n. Expects a single-image, single-channel map.
VarianceMap variance_map(const Tensor& gmap, int n);

/// Per image: ||v_hr - v_sr||_2 / patches; averaged over the batch.
double gv_loss(const Tensor& sr, const Tensor& hr, FilterKind filter, int n);

struct EgLoss {
    double total = 0.0;
    double l1 = 0.0;
    double lx = 0.0;
    double ly = 0.0;
    double ll = 0.0;
};

EgLoss eg_loss(const Tensor& sr, const Tensor& hr, const LossConfig& cfg);

/// Mean absolute error over every element.
double l1_loss(const Tensor& sr, const Tensor& hr);
/// Mean squared error over every element.
double l2_loss(const Tensor& sr, const Tensor& hr);

// ---- value and gradient with respect to sr ------------------------------------

struct LossGrad {
    double value = 0.0;
    Tensor grad;
};

LossGrad l1_loss_grad(const Tensor& sr, const Tensor& hr);
LossGrad l2_loss_grad(const Tensor& sr, const Tensor& hr);
LossGrad gv_loss_grad(const Tensor& sr, const Tensor& hr, FilterKind filter, int n);

struct EgLossGrad {
    EgLoss value;
    Tensor grad;
};
EgLossGrad eg_loss_grad(const Tensor& sr, const Tensor& hr, const LossConfig& cfg);

// ---- trade-off weights ----------------------------------------------------------

struct Lambdas {
    double x = 0.0;
    double y = 0.0;
    double l = 0.0;
};

/// lambda_i = total * |s_i| / (|s_x| + |s_y| + |s_l|); equal thirds when all
/// scales are zero.
Lambdas derive_lambdas(double sx, double sy, double sl, double total);

/// Per-channel scale vectors, each reduced by mean absolute value first.
Lambdas derive_lambdas(std::span<const float> sx, std::span<const float> sy, std::span<const float> sl, double total);

LossConfig with_lambdas(LossConfig cfg, const Lambdas& l);

} // namespace efdn
