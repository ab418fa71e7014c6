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

#include "efdn/loss.hpp"

#include <cmath>
#include <string>

#include "efdn/error.hpp"

namespace efdn {

namespace {

constexpr float kGrayWeights[3] = {0.299f, 0.587f, 0.114f};

void require_pair(const Tensor& sr, const Tensor& hr) {
    if (sr.shape() != hr.shape()) {
        throw InputError("loss: sr " + to_string(sr.shape()) + " and hr " + to_string(hr.shape()) + " differ");
    }
}

void require_rgb_pair(const Tensor& sr, const Tensor& hr) {
    require_pair(sr, hr);
    if (sr.c() != 3) {
        throw InputError("gradient-variance loss expects 3-channel images, got " + std::to_string(sr.c()));
    }
}

ConvParams filter_conv(FilterKind filter) {
    ConvParams p = ConvParams::zeros(1, 1, 3, 3);
    const auto& taps = filter_taps(filter);
    std::copy(taps.begin(), taps.end(), p.weight.data());
    return p;
}

struct Crop {
    int y0, x0, rows, cols;  // rows/cols counted in patches
};

Crop patch_crop(int h, int w, int n) {
    if (n < 2) {
        throw ConfigError("patch side must be >= 2, got " + std::to_string(n));
    }
    if (h < n || w < n) {
        throw InputError("image " + std::to_string(w) + "x" + std::to_string(h) + " smaller than patch " +
                         std::to_string(n));
    }
    const int rows = h / n, cols = w / n;
    return {(h - rows * n) / 2, (w - cols * n) / 2, rows, cols};
}

Tensor image_of(const Tensor& batch, int n) {
    Tensor out({1, batch.c(), batch.h(), batch.w()});
    std::copy_n(batch.plane(n, 0), out.size(), out.data());
    return out;
}

struct PatchStats {
    std::vector<double> variance;
    std::vector<double> mean;
};

PatchStats patch_stats(const Tensor& gmap, const Crop& crop, int n) {
    PatchStats s;
    const std::size_t count = static_cast<std::size_t>(crop.rows) * crop.cols;
    s.variance.resize(count);
    s.mean.resize(count);
    const double denom = static_cast<double>(n) * n - 1.0;
    for (int pr = 0; pr < crop.rows; ++pr) {
        for (int pc = 0; pc < crop.cols; ++pc) {
            const int y0 = crop.y0 + pr * n, x0 = crop.x0 + pc * n;
            double sum = 0.0;
            for (int y = 0; y < n; ++y) {
                for (int x = 0; x < n; ++x) {
                    sum += gmap.at(0, 0, y0 + y, x0 + x);
                }
            }
            const double mean = sum / (static_cast<double>(n) * n);
            double sq = 0.0;
            for (int y = 0; y < n; ++y) {
                for (int x = 0; x < n; ++x) {
                    const double d = gmap.at(0, 0, y0 + y, x0 + x) - mean;
                    sq += d * d;
                }
            }
            const std::size_t i = static_cast<std::size_t>(pr) * crop.cols + pc;
            s.mean[i] = mean;
            s.variance[i] = sq / denom;
        }
    }
    return s;
}

// Loss of one image and, optionally, its gradient with respect to that sr image.
double gv_single(const Tensor& sr, const Tensor& hr, FilterKind filter, int n, Tensor* grad) {
    const ConvParams fconv = filter_conv(filter);
    const Tensor gsr = to_gray(sr);
    const Tensor gmap_sr = conv2d(gsr, fconv);
    const Tensor gmap_hr = conv2d(to_gray(hr), fconv);
    const Crop crop = patch_crop(sr.h(), sr.w(), n);
    const PatchStats vs = patch_stats(gmap_sr, crop, n);
    const PatchStats vh = patch_stats(gmap_hr, crop, n);
    const double patches = static_cast<double>(vs.variance.size());

    double sq = 0.0;
    for (std::size_t i = 0; i < vs.variance.size(); ++i) {
        const double d = vh.variance[i] - vs.variance[i];
        sq += d * d;
    }
    const double norm = std::sqrt(sq);
    const double loss = norm / patches;
    if (grad == nullptr) {
        return loss;
    }

    *grad = Tensor(sr.shape());
    if (norm == 0.0) {
        return loss;
    }
    Tensor ggmap(gmap_sr.shape());
    const double denom = static_cast<double>(n) * n - 1.0;
    for (int pr = 0; pr < crop.rows; ++pr) {
        for (int pc = 0; pc < crop.cols; ++pc) {
            const std::size_t i = static_cast<std::size_t>(pr) * crop.cols + pc;
            const double dv = -(vh.variance[i] - vs.variance[i]) / (norm * patches);
            const int y0 = crop.y0 + pr * n, x0 = crop.x0 + pc * n;
            for (int y = 0; y < n; ++y) {
                for (int x = 0; x < n; ++x) {
                    const double g = gmap_sr.at(0, 0, y0 + y, x0 + x) - vs.mean[i];
                    ggmap.at(0, 0, y0 + y, x0 + x) = static_cast<float>(dv * 2.0 * g / denom);
                }
            }
        }
    }
    const Tensor ggray = conv2d_grad_input(ggmap, fconv, gsr.shape());
    for (int c = 0; c < 3; ++c) {
        float* dst = grad->plane(0, c);
        const float* src = ggray.data();
        for (std::size_t i = 0; i < ggray.size(); ++i) {
            dst[i] = kGrayWeights[c] * src[i];
        }
    }
    return loss;
}

} // namespace

void LossConfig::validate() const {
    if (patch < 2) {
        throw ConfigError("patch side must be >= 2, got " + std::to_string(patch));
    }
    for (double l : {lambda_x, lambda_y, lambda_l}) {
        if (!std::isfinite(l) || l < 0.0) {
            throw ConfigError("loss weights must be finite and non-negative");
        }
    }
}

Tensor to_gray(const Tensor& img) {
    if (img.c() != 3) {
        throw DimensionError("to_gray expects 3 channels, got " + std::to_string(img.c()));
    }
    Tensor out({img.n(), 1, img.h(), img.w()});
    const std::size_t plane = img.shape().plane();
    for (int n = 0; n < img.n(); ++n) {
        const float* r = img.plane(n, 0);
        const float* g = img.plane(n, 1);
        const float* b = img.plane(n, 2);
        float* y = out.plane(n, 0);
        for (std::size_t i = 0; i < plane; ++i) {
            y[i] = kGrayWeights[0] * r[i] + kGrayWeights[1] * g[i] + kGrayWeights[2] * b[i];
        }
    }
    return out;
}

Tensor gradient_map(const Tensor& gray, FilterKind filter) {
    if (gray.c() != 1) {
        throw DimensionError("gradient_map expects a single channel, got " + std::to_string(gray.c()));
    }
    return conv2d(gray, filter_conv(filter));
}

VarianceMap variance_map(const Tensor& gmap, int n) {
    if (gmap.n() != 1 || gmap.c() != 1) {
        throw DimensionError("variance_map expects a (1, 1, H, W) map, got " + to_string(gmap.shape()));
    }
    const Crop crop = patch_crop(gmap.h(), gmap.w(), n);
    return {crop.rows, crop.cols, patch_stats(gmap, crop, n).variance};
}

double gv_loss(const Tensor& sr, const Tensor& hr, FilterKind filter, int n) {
    require_rgb_pair(sr, hr);
    double total = 0.0;
    for (int b = 0; b < sr.n(); ++b) {
        total += gv_single(image_of(sr, b), image_of(hr, b), filter, n, nullptr);
    }
    return total / sr.n();
}

LossGrad gv_loss_grad(const Tensor& sr, const Tensor& hr, FilterKind filter, int n) {
    require_rgb_pair(sr, hr);
    LossGrad out{0.0, Tensor(sr.shape())};
    const float inv_batch = 1.0f / static_cast<float>(sr.n());
    for (int b = 0; b < sr.n(); ++b) {
        Tensor g;
        out.value += gv_single(image_of(sr, b), image_of(hr, b), filter, n, &g);
        float* dst = out.grad.plane(b, 0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            dst[i] = g.data()[i] * inv_batch;
        }
    }
    out.value /= sr.n();
    return out;
}

double l1_loss(const Tensor& sr, const Tensor& hr) {
    require_pair(sr, hr);
    double acc = 0.0;
    for (std::size_t i = 0; i < sr.size(); ++i) {
        acc += std::abs(static_cast<double>(sr.data()[i]) - hr.data()[i]);
    }
    return acc / static_cast<double>(sr.size());
}

double l2_loss(const Tensor& sr, const Tensor& hr) {
    require_pair(sr, hr);
    double acc = 0.0;
    for (std::size_t i = 0; i < sr.size(); ++i) {
        const double d = static_cast<double>(sr.data()[i]) - hr.data()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(sr.size());
}

LossGrad l1_loss_grad(const Tensor& sr, const Tensor& hr) {
    LossGrad out{l1_loss(sr, hr), Tensor(sr.shape())};
    const float inv = 1.0f / static_cast<float>(sr.size());
    for (std::size_t i = 0; i < sr.size(); ++i) {
        const float d = sr.data()[i] - hr.data()[i];
        out.grad.data()[i] = d > 0.0f ? inv : (d < 0.0f ? -inv : 0.0f);
    }
    return out;
}

LossGrad l2_loss_grad(const Tensor& sr, const Tensor& hr) {
    LossGrad out{l2_loss(sr, hr), Tensor(sr.shape())};
    const float scale = 2.0f / static_cast<float>(sr.size());
    for (std::size_t i = 0; i < sr.size(); ++i) {
        out.grad.data()[i] = scale * (sr.data()[i] - hr.data()[i]);
    }
    return out;
}

EgLoss eg_loss(const Tensor& sr, const Tensor& hr, const LossConfig& cfg) {
    cfg.validate();
    require_rgb_pair(sr, hr);
    EgLoss out;
    out.l1 = l1_loss(sr, hr);
    out.lx = gv_loss(sr, hr, FilterKind::sobel_x, cfg.patch);
    out.ly = gv_loss(sr, hr, FilterKind::sobel_y, cfg.patch);
    out.ll = gv_loss(sr, hr, FilterKind::laplacian, cfg.patch);
    out.total = out.l1 + cfg.lambda_x * out.lx + cfg.lambda_y * out.ly + cfg.lambda_l * out.ll;
    return out;
}

EgLossGrad eg_loss_grad(const Tensor& sr, const Tensor& hr, const LossConfig& cfg) {
    cfg.validate();
    require_rgb_pair(sr, hr);
    LossGrad l1 = l1_loss_grad(sr, hr);
    const LossGrad gx = gv_loss_grad(sr, hr, FilterKind::sobel_x, cfg.patch);
    const LossGrad gy = gv_loss_grad(sr, hr, FilterKind::sobel_y, cfg.patch);
    const LossGrad gl = gv_loss_grad(sr, hr, FilterKind::laplacian, cfg.patch);

    EgLossGrad out;
    out.value.l1 = l1.value;
    out.value.lx = gx.value;
    out.value.ly = gy.value;
    out.value.ll = gl.value;
    out.value.total = l1.value + cfg.lambda_x * gx.value + cfg.lambda_y * gy.value + cfg.lambda_l * gl.value;
    out.grad = std::move(l1.grad);
    const auto lx = static_cast<float>(cfg.lambda_x), ly = static_cast<float>(cfg.lambda_y),
               ll = static_cast<float>(cfg.lambda_l);
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
        out.grad.data()[i] += lx * gx.grad.data()[i] + ly * gy.grad.data()[i] + ll * gl.grad.data()[i];
    }
    return out;
}

Lambdas derive_lambdas(double sx, double sy, double sl, double total) {
    const double ax = std::abs(sx), ay = std::abs(sy), al = std::abs(sl);
    const double sum = ax + ay + al;
    if (sum == 0.0) {
        return {total / 3.0, total / 3.0, total / 3.0};
    }
    return {total * ax / sum, total * ay / sum, total * al / sum};
}

Lambdas derive_lambdas(std::span<const float> sx, std::span<const float> sy, std::span<const float> sl,
                       double total) {
    auto mean_abs = [](std::span<const float> v) {
        if (v.empty()) {
            return 0.0;
        }
        double acc = 0.0;
        for (float s : v) {
            acc += std::abs(s);
        }
        return acc / static_cast<double>(v.size());
    };
    return derive_lambdas(mean_abs(sx), mean_abs(sy), mean_abs(sl), total);
}

LossConfig with_lambdas(LossConfig cfg, const Lambdas& l) {
    cfg.lambda_x = l.x;
    cfg.lambda_y = l.y;
    cfg.lambda_l = l.l;
    return cfg;
}

} // namespace efdn
