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

#include "efdn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "efdn/error.hpp"

namespace efdn {

namespace {

void check_shape(const Shape4& s) {
    if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
        throw DimensionError("tensor dims must all be >= 1, got " + to_string(s));
    }
}

struct ConvGeometry {
    int out_h;
    int out_w;
};

ConvGeometry conv_geometry(const Shape4& x, const ConvParams& p) {
    p.validate();
    if (x.c != p.in_ch()) {
        throw DimensionError("conv2d: input has " + std::to_string(x.c) + " channels, kernel expects " +
                             std::to_string(p.in_ch()));
    }
    const int oh = x.h + 2 * p.pad_h - p.kh() + 1;
    const int ow = x.w + 2 * p.pad_w - p.kw() + 1;
    if (oh < 1 || ow < 1) {
        throw DimensionError("conv2d: kernel larger than padded input " + to_string(x));
    }
    return {oh, ow};
}

// Output columns ox in [lo, hi) read input column ox + j - pad inside [0, in_w).
inline void valid_cols(int j, int pad, int in_w, int out_w, int& lo, int& hi) {
    lo = std::max(0, pad - j);
    hi = std::min(out_w, in_w + pad - j);
}

} // namespace

std::string to_string(const Shape4& s) {
    std::ostringstream os;
    os << "(" << s.n << ", " << s.c << ", " << s.h << ", " << s.w << ")";
    return os.str();
}

Tensor::Tensor() : shape_{}, data_(1, 0.0f) {}

Tensor::Tensor(Shape4 shape, float fill) : shape_(shape) {
    check_shape(shape_);
    data_.assign(shape_.numel(), fill);
}

Tensor::Tensor(Shape4 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_.numel()) {
        throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match dims " +
                             to_string(shape_));
    }
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

ConvParams ConvParams::zeros(int out_ch, int in_ch, int kh, int kw) {
    ConvParams p;
    p.weight = Tensor({out_ch, in_ch, kh, kw});
    p.bias.assign(static_cast<std::size_t>(out_ch), 0.0f);
    p.pad_h = kh / 2;
    p.pad_w = kw / 2;
    p.validate();
    return p;
}

void ConvParams::validate() const {
    if (kh() % 2 == 0 || kw() % 2 == 0) {
        throw ConfigError("conv kernel must be odd-sized, got " + std::to_string(kh()) + "x" + std::to_string(kw()));
    }
    if (bias.size() != static_cast<std::size_t>(out_ch())) {
        throw ConfigError("conv bias length " + std::to_string(bias.size()) + " != out channels " +
                          std::to_string(out_ch()));
    }
    if (pad_h < 0 || pad_w < 0) {
        throw ConfigError("conv padding must be non-negative");
    }
}

Tensor conv2d(const Tensor& x, const ConvParams& p) {
    const auto [oh, ow] = conv_geometry(x.shape(), p);
    const int N = x.n(), C = x.c(), H = x.h(), W = x.w();
    const int O = p.out_ch(), KH = p.kh(), KW = p.kw();
    Tensor out({N, O, oh, ow});

    for (int n = 0; n < N; ++n) {
        for (int o = 0; o < O; ++o) {
            float* __restrict dst = out.plane(n, o);
            std::fill(dst, dst + static_cast<std::size_t>(oh) * ow, p.bias[o]);
            for (int c = 0; c < C; ++c) {
                const float* src = x.plane(n, c);
                const float* k = p.weight.plane(o, c);
                for (int i = 0; i < KH; ++i) {
                    const int y0 = std::max(0, p.pad_h - i);
                    const int y1 = std::min(oh, H + p.pad_h - i);
                    for (int j = 0; j < KW; ++j) {
                        const float wv = k[i * KW + j];
                        if (wv == 0.0f) {
                            continue;
                        }
                        int x0, x1;
                        valid_cols(j, p.pad_w, W, ow, x0, x1);
                        const int dx = j - p.pad_w;
                        for (int y = y0; y < y1; ++y) {
                            float* __restrict drow = dst + static_cast<std::size_t>(y) * ow;
                            const float* __restrict srow = src + static_cast<std::size_t>(y + i - p.pad_h) * W + dx;
                            for (int xx = x0; xx < x1; ++xx) {
                                drow[xx] += wv * srow[xx];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor conv2d_reference(const Tensor& x, const ConvParams& p) {
    const auto [oh, ow] = conv_geometry(x.shape(), p);
    Tensor out({x.n(), p.out_ch(), oh, ow});
    for (int n = 0; n < x.n(); ++n) {
        for (int o = 0; o < p.out_ch(); ++o) {
            for (int y = 0; y < oh; ++y) {
                for (int xx = 0; xx < ow; ++xx) {
                    double acc = p.bias[o];
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
                    out.at(n, o, y, xx) = static_cast<float>(acc);
                }
            }
        }
    }
    return out;
}

Tensor pixel_shuffle(const Tensor& x, int r) {
    if (r < 1) {
        throw ConfigError("pixel_shuffle: upscale factor must be >= 1");
    }
    const int rr = r * r;
    if (x.c() % rr != 0) {
        throw DimensionError("pixel_shuffle: channels " + std::to_string(x.c()) + " not divisible by r^2 = " +
                             std::to_string(rr));
    }
    const int oc = x.c() / rr;
    Tensor out({x.n(), oc, x.h() * r, x.w() * r});
    for (int n = 0; n < x.n(); ++n) {
        for (int c = 0; c < oc; ++c) {
            for (int dy = 0; dy < r; ++dy) {
                for (int dx = 0; dx < r; ++dx) {
                    const float* src = x.plane(n, c * rr + dy * r + dx);
                    for (int y = 0; y < x.h(); ++y) {
                        for (int xx = 0; xx < x.w(); ++xx) {
                            out.at(n, c, y * r + dy, xx * r + dx) = src[y * x.w() + xx];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor pixel_unshuffle(const Tensor& x, int r) {
    if (r < 1) {
        throw ConfigError("pixel_unshuffle: factor must be >= 1");
    }
    if (x.h() % r != 0 || x.w() % r != 0) {
        throw DimensionError("pixel_unshuffle: spatial dims " + to_string(x.shape()) + " not divisible by " +
                             std::to_string(r));
    }
    const int rr = r * r;
    const int oh = x.h() / r, ow = x.w() / r;
    Tensor out({x.n(), x.c() * rr, oh, ow});
    for (int n = 0; n < x.n(); ++n) {
        for (int c = 0; c < x.c(); ++c) {
            for (int dy = 0; dy < r; ++dy) {
                for (int dx = 0; dx < r; ++dx) {
                    float* dst = out.plane(n, c * rr + dy * r + dx);
                    for (int y = 0; y < oh; ++y) {
                        for (int xx = 0; xx < ow; ++xx) {
                            dst[y * ow + xx] = x.at(n, c, y * r + dy, xx * r + dx);
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError("add: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
    Tensor out = a;
    float* __restrict d = out.data();
    const float* __restrict s = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        d[i] += s[i];
    }
    return out;
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
    if (parts.empty()) {
        throw DimensionError("concat: no inputs");
    }
    const Shape4 first = parts.front()->shape();
    int channels = 0;
    for (const Tensor* t : parts) {
        const Shape4& s = t->shape();
        if (s.n != first.n || s.h != first.h || s.w != first.w) {
            throw DimensionError("concat: " + to_string(s) + " incompatible with " + to_string(first));
        }
        channels += s.c;
    }
    Tensor out({first.n, channels, first.h, first.w});
    for (int n = 0; n < first.n; ++n) {
        int at = 0;
        for (const Tensor* t : parts) {
            std::copy_n(t->plane(n, 0), static_cast<std::size_t>(t->c()) * first.plane(), out.plane(n, at));
            at += t->c();
        }
    }
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    const Tensor* parts[] = {&a, &b};
    return concat_channels(parts);
}

Tensor slice_channels(const Tensor& x, int begin, int end) {
    if (begin < 0 || end > x.c() || begin >= end) {
        throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                             ") outside channels " + std::to_string(x.c()));
    }
    Tensor out({x.n(), end - begin, x.h(), x.w()});
    for (int n = 0; n < x.n(); ++n) {
        std::copy_n(x.plane(n, begin), static_cast<std::size_t>(end - begin) * x.shape().plane(), out.plane(n, 0));
    }
    return out;
}

Tensor leaky_relu(const Tensor& x, float slope) {
    Tensor out = x;
    for (float& v : out.values()) {
        v = v >= 0.0f ? v : slope * v;
    }
    return out;
}

Tensor scaled_depthwise3x3(const Tensor& x, const std::array<float, 9>& filter, std::span<const float> scale,
                           std::span<const float> bias, int pad) {
    const int C = x.c();
    if (scale.size() != static_cast<std::size_t>(C) || bias.size() != static_cast<std::size_t>(C)) {
        throw DimensionError("scaled_depthwise3x3: scale/bias length must equal channels " + std::to_string(C));
    }
    const int oh = x.h() + 2 * pad - 2, ow = x.w() + 2 * pad - 2;
    if (oh < 1 || ow < 1) {
        throw DimensionError("scaled_depthwise3x3: input too small " + to_string(x.shape()));
    }
    Tensor out({x.n(), C, oh, ow});
    for (int n = 0; n < x.n(); ++n) {
        for (int c = 0; c < C; ++c) {
            float* __restrict dst = out.plane(n, c);
            std::fill(dst, dst + static_cast<std::size_t>(oh) * ow, bias[c]);
            const float* src = x.plane(n, c);
            for (int i = 0; i < 3; ++i) {
                const int y0 = std::max(0, pad - i), y1 = std::min(oh, x.h() + pad - i);
                for (int j = 0; j < 3; ++j) {
                    const float wv = scale[c] * filter[i * 3 + j];
                    if (wv == 0.0f) {
                        continue;
                    }
                    int x0, x1;
                    valid_cols(j, pad, x.w(), ow, x0, x1);
                    for (int y = y0; y < y1; ++y) {
                        float* __restrict drow = dst + static_cast<std::size_t>(y) * ow;
                        const float* __restrict srow = src + static_cast<std::size_t>(y + i - pad) * x.w() + (j - pad);
                        for (int xx = x0; xx < x1; ++xx) {
                            drow[xx] += wv * srow[xx];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor conv2d_grad_input(const Tensor& grad_out, const ConvParams& p, const Shape4& input_shape) {
    const auto [oh, ow] = conv_geometry(input_shape, p);
    if (grad_out.shape() != Shape4{input_shape.n, p.out_ch(), oh, ow}) {
        throw DimensionError("conv2d_grad_input: gradient shape " + to_string(grad_out.shape()));
    }
    const int H = input_shape.h, W = input_shape.w;
    Tensor gin(input_shape);
    for (int n = 0; n < input_shape.n; ++n) {
        for (int c = 0; c < input_shape.c; ++c) {
            float* gi = gin.plane(n, c);
            for (int o = 0; o < p.out_ch(); ++o) {
                const float* go = grad_out.plane(n, o);
                const float* k = p.weight.plane(o, c);
                for (int i = 0; i < p.kh(); ++i) {
                    const int y0 = std::max(0, p.pad_h - i), y1 = std::min(oh, H + p.pad_h - i);
                    for (int j = 0; j < p.kw(); ++j) {
                        const float wv = k[i * p.kw() + j];
                        if (wv == 0.0f) {
                            continue;
                        }
                        int x0, x1;
                        valid_cols(j, p.pad_w, W, ow, x0, x1);
                        for (int y = y0; y < y1; ++y) {
                            float* __restrict grow = gi + static_cast<std::size_t>(y + i - p.pad_h) * W + (j - p.pad_w);
                            const float* __restrict orow = go + static_cast<std::size_t>(y) * ow;
                            for (int xx = x0; xx < x1; ++xx) {
                                grow[xx] += wv * orow[xx];
                            }
                        }
                    }
                }
            }
        }
    }
    return gin;
}

Tensor conv2d_grad_weight(const Tensor& grad_out, const Tensor& x, const ConvParams& p) {
    const auto [oh, ow] = conv_geometry(x.shape(), p);
    if (grad_out.shape() != Shape4{x.n(), p.out_ch(), oh, ow}) {
        throw DimensionError("conv2d_grad_weight: gradient shape " + to_string(grad_out.shape()));
    }
    const int H = x.h(), W = x.w();
    Tensor gw(p.weight.shape());
    for (int o = 0; o < p.out_ch(); ++o) {
        for (int c = 0; c < p.in_ch(); ++c) {
            for (int i = 0; i < p.kh(); ++i) {
                const int y0 = std::max(0, p.pad_h - i), y1 = std::min(oh, H + p.pad_h - i);
                for (int j = 0; j < p.kw(); ++j) {
                    int x0, x1;
                    valid_cols(j, p.pad_w, W, ow, x0, x1);
                    double acc = 0.0;
                    for (int n = 0; n < x.n(); ++n) {
                        const float* go = grad_out.plane(n, o);
                        const float* src = x.plane(n, c);
                        for (int y = y0; y < y1; ++y) {
                            const float* __restrict orow = go + static_cast<std::size_t>(y) * ow;
                            const float* __restrict srow = src + static_cast<std::size_t>(y + i - p.pad_h) * W + (j - p.pad_w);
                            float row = 0.0f;
                            for (int xx = x0; xx < x1; ++xx) {
                                row += orow[xx] * srow[xx];
                            }
                            acc += row;
                        }
                    }
                    gw.at(o, c, i, j) = static_cast<float>(acc);
                }
            }
        }
    }
    return gw;
}

std::vector<float> conv2d_grad_bias(const Tensor& grad_out) {
    std::vector<float> gb(static_cast<std::size_t>(grad_out.c()), 0.0f);
    const std::size_t plane = grad_out.shape().plane();
    for (int c = 0; c < grad_out.c(); ++c) {
        double acc = 0.0;
        for (int n = 0; n < grad_out.n(); ++n) {
            const float* g = grad_out.plane(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                acc += g[i];
            }
        }
        gb[c] = static_cast<float>(acc);
    }
    return gb;
}

DepthwiseGrads scaled_depthwise3x3_grad(const Tensor& grad_out, const Tensor& x, const std::array<float, 9>& filter,
                                        std::span<const float> scale, int pad) {
    const int C = x.c();
    const int oh = x.h() + 2 * pad - 2, ow = x.w() + 2 * pad - 2;
    if (grad_out.shape() != Shape4{x.n(), C, oh, ow}) {
        throw DimensionError("scaled_depthwise3x3_grad: gradient shape " + to_string(grad_out.shape()));
    }
    DepthwiseGrads g{Tensor(x.shape()), std::vector<float>(C, 0.0f), conv2d_grad_bias(grad_out)};
    for (int c = 0; c < C; ++c) {
        double scale_acc = 0.0;
        for (int n = 0; n < x.n(); ++n) {
            const float* go = grad_out.plane(n, c);
            const float* src = x.plane(n, c);
            float* gi = g.input.plane(n, c);
            for (int i = 0; i < 3; ++i) {
                const int y0 = std::max(0, pad - i), y1 = std::min(oh, x.h() + pad - i);
                for (int j = 0; j < 3; ++j) {
                    const float f = filter[i * 3 + j];
                    if (f == 0.0f) {
                        continue;
                    }
                    const float wv = scale[c] * f;
                    int x0, x1;
                    valid_cols(j, pad, x.w(), ow, x0, x1);
                    double tap = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const std::size_t in_row = static_cast<std::size_t>(y + i - pad) * x.w() + (j - pad);
                        const float* __restrict orow = go + static_cast<std::size_t>(y) * ow;
                        const float* __restrict srow = src + in_row;
                        float* __restrict grow = gi + in_row;
                        float row = 0.0f;
                        for (int xx = x0; xx < x1; ++xx) {
                            grow[xx] += wv * orow[xx];
                            row += orow[xx] * srow[xx];
                        }
                        tap += row;
                    }
                    scale_acc += f * tap;
                }
            }
        }
        g.scale[c] = static_cast<float>(scale_acc);
    }
    return g;
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError("max_abs_diff: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
    float m = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

} // namespace efdn
