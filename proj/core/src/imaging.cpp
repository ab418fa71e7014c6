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

#include "efdn/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "efdn/error.hpp"

namespace efdn {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp png, png_const_charp) { longjmp(png_jmpbuf(png), 1); }
void png_warning_handler(png_structp, png_const_charp) {}

double cubic(double x) {
    constexpr double a = -0.5;
    const double ax = std::abs(x);
    if (ax <= 1.0) {
        return (a + 2.0) * ax * ax * ax - (a + 3.0) * ax * ax + 1.0;
    }
    if (ax < 2.0) {
        return a * ax * ax * ax - 5.0 * a * ax * ax + 8.0 * a * ax - 4.0 * a;
    }
    return 0.0;
}

struct Contribution {
    std::vector<int> index;
    std::vector<double> weight;
};

// Tap positions and normalized weights for every output sample along one axis.
std::vector<Contribution> contributions(int in_len, int out_len, double scale) {
    const double kernel_scale = scale < 1.0 ? scale : 1.0;
    const double support = 2.0 / kernel_scale;
    std::vector<Contribution> out(static_cast<std::size_t>(out_len));
    for (int i = 0; i < out_len; ++i) {
        const double u = (i + 0.5) / scale - 0.5;
        const int left = static_cast<int>(std::floor(u - support));
        const int right = static_cast<int>(std::ceil(u + support));
        Contribution& c = out[static_cast<std::size_t>(i)];
        double sum = 0.0;
        for (int j = left; j <= right; ++j) {
            const double w = kernel_scale * cubic(kernel_scale * (u - j));
            if (w == 0.0) {
                continue;
            }
            c.index.push_back(std::clamp(j, 0, in_len - 1));
            c.weight.push_back(w);
            sum += w;
        }
        for (double& w : c.weight) {
            w /= sum;
        }
    }
    return out;
}

void require_same(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw InputError("metric inputs differ: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
}

// Y planes of batch item 0 with `shave` pixels removed from every border.
std::vector<double> shaved_y(const Tensor& img, int shave, int& h, int& w) {
    if (shave < 0) {
        throw InputError("shave must be >= 0");
    }
    h = img.h() - 2 * shave;
    w = img.w() - 2 * shave;
    if (h < 1 || w < 1) {
        throw InputError("shave " + std::to_string(shave) + " removes the whole " + to_string(img.shape()) + " image");
    }
    const Tensor y = rgb_to_y255(img);
    std::vector<double> out(static_cast<std::size_t>(h) * w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            out[static_cast<std::size_t>(r) * w + c] = y.at(0, 0, r + shave, c + shave);
        }
    }
    return out;
}

// "valid" separable Gaussian filtering of an h x w plane.
std::vector<double> gaussian_valid(const std::vector<double>& src, int h, int w, const std::vector<double>& g) {
    const int k = static_cast<int>(g.size());
    const int oh = h - k + 1, ow = w - k + 1;
    std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t) {
                acc += g[t] * src[static_cast<std::size_t>(r) * w + c + t];
            }
            tmp[static_cast<std::size_t>(r) * ow + c] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (int t = 0; t < k; ++t) {
                acc += g[t] * tmp[static_cast<std::size_t>(r + t) * ow + c];
            }
            out[static_cast<std::size_t>(r) * ow + c] = acc;
        }
    }
    return out;
}

} // namespace

Tensor to_tensor(const Image& img) {
    if (img.width < 1 || img.height < 1 ||
        img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
        throw InputError("image raster does not match its dimensions");
    }
    Tensor t({1, 3, img.height, img.width});
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::size_t p = (static_cast<std::size_t>(y) * img.width + x) * 3;
            for (int c = 0; c < 3; ++c) {
                t.at(0, c, y, x) = static_cast<float>(img.rgb[p + c]) / 255.0f;
            }
        }
    }
    return t;
}

Image to_image(const Tensor& t) {
    if (t.c() != 3) {
        throw DimensionError("to_image expects 3 channels, got " + std::to_string(t.c()));
    }
    Image img{t.w(), t.h(), std::vector<std::uint8_t>(static_cast<std::size_t>(t.w()) * t.h() * 3)};
    for (int y = 0; y < t.h(); ++y) {
        for (int x = 0; x < t.w(); ++x) {
            const std::size_t p = (static_cast<std::size_t>(y) * t.w() + x) * 3;
            for (int c = 0; c < 3; ++c) {
                const float v = std::clamp(t.at(0, c, y, x), 0.0f, 1.0f);
                img.rgb[p + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
            }
        }
    }
    return img;
}

Image load_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) {
        throw IoError(path.string() + ": cannot open for reading");
    }
    png_byte sig[8];
    if (std::fread(sig, 1, sizeof sig, file.get()) != sizeof sig || png_sig_cmp(sig, 0, sizeof sig) != 0) {
        throw IoError(path.string() + ": not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": libpng initialization failed");
    }
    Image img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": malformed or truncated PNG");
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, sizeof sig);
    png_read_info(png, info);

    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) {
        png_set_scale_16(png);
    }
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) {
        png_set_strip_alpha(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
        png_set_strip_alpha(png);
    }
    png_read_update_info(png, info);

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(img.width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path.string() + ": unsupported PNG layout");
    }
    img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        rows[static_cast<std::size_t>(y)] = img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void save_png(const Image& img, const std::filesystem::path& path) {
    if (img.width < 1 || img.height < 1 ||
        img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
        throw InputError(path.string() + ": image raster does not match its dimensions");
    }
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) {
        throw IoError(path.string() + ": cannot open for writing");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path.string() + ": libpng initialization failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path.string() + ": PNG encoding failed");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) {
        throw IoError(path.string() + ": write failed");
    }
}

Tensor bicubic_resize(const Tensor& img, double scale) {
    if (!(scale > 0.0)) {
        throw InputError("bicubic_resize: scale must be > 0");
    }
    const int oh = static_cast<int>(std::ceil(img.h() * scale - 1e-9));
    const int ow = static_cast<int>(std::ceil(img.w() * scale - 1e-9));
    return bicubic_resize(img, oh, ow, scale);
}

Tensor bicubic_resize(const Tensor& img, int out_h, int out_w, double scale) {
    if (!(scale > 0.0)) {
        throw InputError("bicubic_resize: scale must be > 0");
    }
    if (out_h < 1 || out_w < 1) {
        throw InputError("bicubic_resize: result would be empty");
    }
    const auto rows = contributions(img.h(), out_h, scale);
    const auto cols = contributions(img.w(), out_w, scale);
    Tensor tmp({img.n(), img.c(), img.h(), out_w});
    Tensor out({img.n(), img.c(), out_h, out_w});
    for (int n = 0; n < img.n(); ++n) {
        for (int c = 0; c < img.c(); ++c) {
            const float* src = img.plane(n, c);
            float* mid = tmp.plane(n, c);
            for (int y = 0; y < img.h(); ++y) {
                for (int x = 0; x < out_w; ++x) {
                    const Contribution& k = cols[static_cast<std::size_t>(x)];
                    double acc = 0.0;
                    for (std::size_t t = 0; t < k.index.size(); ++t) {
                        acc += k.weight[t] * src[static_cast<std::size_t>(y) * img.w() + k.index[t]];
                    }
                    mid[static_cast<std::size_t>(y) * out_w + x] = static_cast<float>(acc);
                }
            }
            float* dst = out.plane(n, c);
            for (int y = 0; y < out_h; ++y) {
                const Contribution& k = rows[static_cast<std::size_t>(y)];
                for (int x = 0; x < out_w; ++x) {
                    double acc = 0.0;
                    for (std::size_t t = 0; t < k.index.size(); ++t) {
                        acc += k.weight[t] * mid[static_cast<std::size_t>(k.index[t]) * out_w + x];
                    }
                    dst[static_cast<std::size_t>(y) * out_w + x] = static_cast<float>(acc);
                }
            }
        }
    }
    return out;
}

Tensor rgb_to_y255(const Tensor& img) {
    if (img.c() != 3) {
        throw DimensionError("rgb_to_y255 expects 3 channels, got " + std::to_string(img.c()));
    }
    Tensor y({img.n(), 1, img.h(), img.w()});
    const std::size_t plane = img.shape().plane();
    for (int n = 0; n < img.n(); ++n) {
        const float* r = img.plane(n, 0);
        const float* g = img.plane(n, 1);
        const float* b = img.plane(n, 2);
        float* dst = y.plane(n, 0);
        for (std::size_t i = 0; i < plane; ++i) {
            dst[i] = static_cast<float>(16.0 + 65.481 * r[i] + 128.553 * g[i] + 24.966 * b[i]);
        }
    }
    return y;
}

double psnr_y(const Tensor& sr, const Tensor& hr, int shave) {
    require_same(sr, hr);
    int h = 0, w = 0;
    const auto a = shaved_y(sr, shave, h, w);
    const auto b = shaved_y(hr, shave, h, w);
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) {
        return kPsnrInfinity;
    }
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim_y(const Tensor& sr, const Tensor& hr, int shave) {
    require_same(sr, hr);
    int h = 0, w = 0;
    const auto a = shaved_y(sr, shave, h, w);
    const auto b = shaved_y(hr, shave, h, w);
    constexpr int kWindow = 11;
    constexpr double kSigma = 1.5;
    if (h < kWindow || w < kWindow) {
        throw InputError("ssim_y needs at least 11x11 pixels after shaving, got " + std::to_string(w) + "x" +
                         std::to_string(h));
    }
    std::vector<double> g(kWindow);
    double gsum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        gsum += g[i];
    }
    for (double& v : g) {
        v /= gsum;
    }
    std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu_a = gaussian_valid(a, h, w, g);
    const auto mu_b = gaussian_valid(b, h, w, g);
    const auto s_aa = gaussian_valid(aa, h, w, g);
    const auto s_bb = gaussian_valid(bb, h, w, g);
    const auto s_ab = gaussian_valid(ab, h, w, g);
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        const double va = s_aa[i] - ma * ma, vb = s_bb[i] - mb * mb, cov = s_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

} // namespace efdn
