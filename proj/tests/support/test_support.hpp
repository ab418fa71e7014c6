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

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "efdn/tensor.hpp"

namespace efdn::testing {

/// Seeded value source for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    float uniform(float lo, float hi) { return std::uniform_real_distribution<float>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
    }
    std::mt19937_64& rng() { return rng_; }

    Tensor tensor(Shape4 s, float lo = -1.0f, float hi = 1.0f) {
        Tensor t(s);
        for (float& v : t.values()) {
            v = uniform(lo, hi);
        }
        return t;
    }

    /// Values bounded away from zero (keeps FD probes off activation kinks).
    Tensor tensor_off_zero(Shape4 s, float margin = 0.05f) {
        Tensor t(s);
        for (float& v : t.values()) {
            const float m = uniform(margin, 1.0f);
            v = integer(0, 1) ? m : -m;
        }
        return t;
    }

    ConvParams conv(int out_ch, int in_ch, int k, float bias_scale = 0.5f) {
        ConvParams p = ConvParams::zeros(out_ch, in_ch, k, k);
        p.weight = tensor(p.weight.shape());
        for (float& b : p.bias) {
            b = uniform(-bias_scale, bias_scale);
        }
        return p;
    }

    std::vector<float> vec(int n, float lo = -1.0f, float hi = 1.0f) {
        std::vector<float> v(static_cast<std::size_t>(n));
        for (float& x : v) {
            x = uniform(lo, hi);
        }
        return v;
    }

private:
    std::mt19937_64 rng_;
};

/// Direct-summation convolution in double with explicit bounds checks.
inline std::vector<double> naive_conv(const Tensor& x, const ConvParams& p) {
    const int oh = x.h() + 2 * p.pad_h - p.kh() + 1;
    const int ow = x.w() + 2 * p.pad_w - p.kw() + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(x.n() * p.out_ch() * oh * ow));
    for (int n = 0; n < x.n(); ++n) {
        for (int o = 0; o < p.out_ch(); ++o) {
            for (int y = 0; y < oh; ++y) {
                for (int xx = 0; xx < ow; ++xx) {
                    double acc = p.bias[static_cast<std::size_t>(o)];
                    for (int c = 0; c < x.c(); ++c) {
                        for (int i = 0; i < p.kh(); ++i) {
                            for (int j = 0; j < p.kw(); ++j) {
                                const int sy = y + i - p.pad_h;
                                const int sx = xx + j - p.pad_w;
                                if (sy < 0 || sy >= x.h() || sx < 0 || sx >= x.w()) {
                                    continue;
                                }
                                acc += static_cast<double>(p.weight.at(o, c, i, j)) * x.at(n, c, sy, sx);
                            }
                        }
                    }
                    out.push_back(acc);
                }
            }
        }
    }
    return out;
}

inline Tensor naive_conv_tensor(const Tensor& x, const ConvParams& p) {
    const auto v = naive_conv(x, p);
    Tensor t({x.n(), p.out_ch(), x.h() + 2 * p.pad_h - p.kh() + 1, x.w() + 2 * p.pad_w - p.kw() + 1});
    for (std::size_t i = 0; i < v.size(); ++i) {
        t.values()[i] = static_cast<float>(v[i]);
    }
    return t;
}

inline double max_diff(const Tensor& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.values()[i]) - b[i]));
    }
    return m;
}

/// Norm-wise relative error between an analytic gradient and central finite
/// differences of `f` around `x` (step h, perturbing x in place).
inline double fd_relative_error(std::span<float> x, std::span<const float> analytic,
                                const std::function<double()>& f, float h = 1e-3f) {
    double num = 0.0, den_a = 0.0, den_n = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const float keep = x[i];
        x[i] = keep + h;
        const double fp = f();
        x[i] = keep - h;
        const double fm = f();
        x[i] = keep;
        const double fd = (fp - fm) / (2.0 * h);
        const double a = i < analytic.size() ? analytic[i] : 0.0;
        num += (a - fd) * (a - fd);
        den_a += a * a;
        den_n += fd * fd;
    }
    const double den = std::max({std::sqrt(den_a), std::sqrt(den_n), 1e-12});
    return std::sqrt(num) / den;
}

/// Sum of t * w in double.
inline double dot(const Tensor& t, const Tensor& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        acc += static_cast<double>(t.values()[i]) * w.values()[i];
    }
    return acc;
}

/// PSNR between two float tensors with peak 1.
inline double psnr_float(const Tensor& a, const Tensor& b) {
    double se = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.values()[i]) - b.values()[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.size());
    return mse == 0.0 ? INFINITY : 10.0 * std::log10(1.0 / mse);
}

} // namespace efdn::testing
