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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace efdn {

/// Dimensions of a rank-4 NCHW tensor. Every extent is at least one.
struct Shape4 {
    int n = 1;
    int c = 1;
    int h = 1;
    int w = 1;

    [[nodiscard]] std::size_t numel() const noexcept {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) *
               static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
    [[nodiscard]] std::size_t plane() const noexcept {
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }

    friend bool operator==(const Shape4&, const Shape4&) = default;
};

std::string to_string(const Shape4& s);

/// Dense NCHW float32 tensor, row-major in (n, c, h, w) order.
class Tensor {
public:
    Tensor();
    explicit Tensor(Shape4 shape, float fill = 0.0f);
    Tensor(Shape4 shape, std::vector<float> data);

    [[nodiscard]] const Shape4& shape() const noexcept { return shape_; }
    [[nodiscard]] int n() const noexcept { return shape_.n; }
    [[nodiscard]] int c() const noexcept { return shape_.c; }
    [[nodiscard]] int h() const noexcept { return shape_.h; }
    [[nodiscard]] int w() const noexcept { return shape_.w; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] float* data() noexcept { return data_.data(); }
    [[nodiscard]] const float* data() const noexcept { return data_.data(); }
    [[nodiscard]] std::span<float> values() noexcept { return data_; }
    [[nodiscard]] std::span<const float> values() const noexcept { return data_; }
    [[nodiscard]] const std::vector<float>& storage() const noexcept { return data_; }

    [[nodiscard]] std::size_t offset(int n, int c, int y, int x) const noexcept {
        return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
    }
    float& at(int n, int c, int y, int x) noexcept { return data_[offset(n, c, y, x)]; }
    [[nodiscard]] float at(int n, int c, int y, int x) const noexcept { return data_[offset(n, c, y, x)]; }

    float* plane(int n, int c) noexcept { return data_.data() + offset(n, c, 0, 0); }
    [[nodiscard]] const float* plane(int n, int c) const noexcept { return data_.data() + offset(n, c, 0, 0); }

    void fill(float v);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape4 shape_;
    std::vector<float> data_;
};

/// Weight (O x I x kh x kw), bias (O) and zero padding of a stride-1 convolution.
struct ConvParams {
    Tensor weight;
    std::vector<float> bias;
    int pad_h = 0;
    int pad_w = 0;

    [[nodiscard]] int out_ch() const noexcept { return weight.n(); }
    [[nodiscard]] int in_ch() const noexcept { return weight.c(); }
    [[nodiscard]] int kh() const noexcept { return weight.h(); }
    [[nodiscard]] int kw() const noexcept { return weight.w(); }

    /// Zero conv with "same" padding (kh/2, kw/2).
    static ConvParams zeros(int out_ch, int in_ch, int kh, int kw);

    /// Throws ConfigError on even kernels or a bias of the wrong length.
    void validate() const;

    friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

// ---- forward kernels --------------------------------------------------------

/// Stride-1 zero-padded convolution (cross-correlation, as in every DL framework).
Tensor conv2d(const Tensor& x, const ConvParams& p);

/// Direct six-loop summation in double precision. Slow; used as the oracle for conv2d.
Tensor conv2d_reference(const Tensor& x, const ConvParams& p);

/// out[n, c, y*r+dy, x*r+dx] = in[n, c*r*r + dy*r + dx, y, x]
Tensor pixel_shuffle(const Tensor& x, int r);
/// Inverse of pixel_shuffle.
Tensor pixel_unshuffle(const Tensor& x, int r);

Tensor add(const Tensor& a, const Tensor& b);
Tensor concat_channels(std::span<const Tensor* const> parts);
Tensor concat_channels(const Tensor& a, const Tensor& b);
/// Channels [begin, end).
Tensor slice_channels(const Tensor& x, int begin, int end);
Tensor leaky_relu(const Tensor& x, float slope);

/// Per-channel fixed 3x3 filter: out[n,c] = scale[c] * (filter * x[n,c]) + bias[c].
/// With pad = 0 the output shrinks by two in each spatial axis.
Tensor scaled_depthwise3x3(const Tensor& x, const std::array<float, 9>& filter,
                           std::span<const float> scale, std::span<const float> bias, int pad);

// ---- backward kernels -------------------------------------------------------

/// dL/dx of conv2d given dL/dout (full correlation with the flipped kernel).
Tensor conv2d_grad_input(const Tensor& grad_out, const ConvParams& p, const Shape4& input_shape);
/// dL/dW of conv2d, same shape as p.weight.
Tensor conv2d_grad_weight(const Tensor& grad_out, const Tensor& x, const ConvParams& p);
/// dL/db of conv2d: per-channel sum of grad_out.
std::vector<float> conv2d_grad_bias(const Tensor& grad_out);

/// Gradients of scaled_depthwise3x3 with respect to its input, scale and bias.
struct DepthwiseGrads {
    Tensor input;
    std::vector<float> scale;
    std::vector<float> bias;
};
DepthwiseGrads scaled_depthwise3x3_grad(const Tensor& grad_out, const Tensor& x,
                                        const std::array<float, 9>& filter,
                                        std::span<const float> scale, int pad);

[[nodiscard]] float max_abs_diff(const Tensor& a, const Tensor& b);

} // namespace efdn
