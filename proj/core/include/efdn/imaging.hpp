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
#include <filesystem>
#include <limits>
#include <vector>

#include "efdn/tensor.hpp"

namespace efdn {

/// 8-bit interleaved RGB raster.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // width * height * 3

    friend bool operator==(const Image&, const Image&) = default;
};

/// (1, 3, h, w) tensor with samples in [0, 1].
Tensor to_tensor(const Image& img);
/// Clamps to [0, 1] and rounds to the nearest 8-bit level. Uses batch item 0.
Image to_image(const Tensor& t);

/// Reads 8- or 16-bit PNGs of any colour type; 16-bit samples are scaled to
/// 8 bits with rounding, alpha is dropped and grey is replicated to RGB.
Image load_png(const std::filesystem::path& path);
void save_png(const Image& img, const std::filesystem::path& path);

/// Cubic-convolution (a = -0.5) resize by `scale` along both axes. Output side
/// is ceil(in * scale). When shrinking, the kernel is widened by 1/scale
/// (antialiasing); samples outside the image are clamped to the edge.
Tensor bicubic_resize(const Tensor& img, double scale);

/// Resize to an explicit output size with the same kernel.
Tensor bicubic_resize(const Tensor& img, int out_h, int out_w, double scale);

inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

/// Studio-range BT.601 luma on the 0..255 scale:
/// 16 + 65.481 R + 128.553 G + 24.966 B for RGB in [0, 1].
Tensor rgb_to_y255(const Tensor& img);

/// PSNR of the Y channel after removing `shave` border pixels; +infinity for
/// identical inputs.
double psnr_y(const Tensor& sr, const Tensor& hr, int shave);

/// Mean SSIM of the Y channel (11x11 Gaussian window, sigma 1.5, K1 = 0.01,
/// K2 = 0.03, L = 255) over the valid window positions after shaving.
double ssim_y(const Tensor& sr, const Tensor& hr, int shave);

} // namespace efdn
