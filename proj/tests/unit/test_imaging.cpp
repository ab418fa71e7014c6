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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "efdn/error.hpp"
#include "efdn/imaging.hpp"
#include "test_support.hpp"

using namespace efdn;
using efdn::testing::Gen;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path d = fs::temp_directory_path() / ("efdn_imaging_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

std::uint32_t crc32(const std::vector<std::uint8_t>& data, std::size_t from) {
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = from; i < data.size(); ++i) {
        c ^= data[i];
        for (int k = 0; k < 8; ++k) c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
    }
    return c ^ 0xFFFFFFFFu;
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void chunk(std::vector<std::uint8_t>& out, const char* type, const std::vector<std::uint8_t>& body) {
    put32(out, static_cast<std::uint32_t>(body.size()));
    std::vector<std::uint8_t> tb(type, type + 4);
    tb.insert(tb.end(), body.begin(), body.end());
    out.insert(out.end(), tb.begin(), tb.end());
    put32(out, crc32(tb, 0));
}

// Minimal PNG writer using stored (uncompressed) deflate blocks.
void write_raw_png(const fs::path& path, int w, int h, int depth, int color, const std::vector<std::uint8_t>& pixels) {
    const int channels = color == 2 ? 3 : color == 6 ? 4 : color == 4 ? 2 : 1;
    const std::size_t row_bytes = static_cast<std::size_t>(w) * channels * depth / 8;
    std::vector<std::uint8_t> raw;
    for (int y = 0; y < h; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + y * row_bytes, pixels.begin() + (y + 1) * row_bytes);
    }
    std::vector<std::uint8_t> z{0x78, 0x01};
    for (std::size_t pos = 0; pos < raw.size(); pos += 65535) {
        const std::size_t n = std::min<std::size_t>(65535, raw.size() - pos);
        z.push_back(pos + n == raw.size() ? 1 : 0);
        z.push_back(static_cast<std::uint8_t>(n & 0xFF));
        z.push_back(static_cast<std::uint8_t>(n >> 8));
        z.push_back(static_cast<std::uint8_t>(~n & 0xFF));
        z.push_back(static_cast<std::uint8_t>((~n >> 8) & 0xFF));
        z.insert(z.end(), raw.begin() + pos, raw.begin() + pos + n);
    }
    std::uint32_t a = 1, b = 0;
    for (std::uint8_t v : raw) {
        a = (a + v) % 65521;
        b = (b + a) % 65521;
    }
    put32(z, (b << 16) | a);

    std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    std::vector<std::uint8_t> ihdr;
    put32(ihdr, static_cast<std::uint32_t>(w));
    put32(ihdr, static_cast<std::uint32_t>(h));
    ihdr.insert(ihdr.end(), {static_cast<std::uint8_t>(depth), static_cast<std::uint8_t>(color), 0, 0, 0});
    chunk(out, "IHDR", ihdr);
    chunk(out, "IDAT", z);
    chunk(out, "IEND", {});
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(out.data()),
                                                static_cast<std::streamsize>(out.size()));
}

double cubic_oracle(double x) {
    const double a = std::abs(x);
    if (a <= 1) return 1.5 * a * a * a - 2.5 * a * a + 1;
    if (a < 2) return -0.5 * a * a * a + 2.5 * a * a - 4 * a + 2;
    return 0;
}

// One output sample of a 1-based cubic resampler with kernel widening.
double resample_oracle(const std::vector<double>& in, int out_index_1based, double s) {
    const double kernel_width = s < 1 ? 4.0 / s : 4.0;
    const double u = out_index_1based / s + 0.5 * (1 - 1 / s);
    const int left = static_cast<int>(std::floor(u - kernel_width / 2));
    const int taps = static_cast<int>(std::ceil(kernel_width)) + 2;
    double num = 0, den = 0;
    for (int k = 0; k < taps; ++k) {
        const int j = left + k;
        const double w = s < 1 ? s * cubic_oracle(s * (u - j)) : cubic_oracle(u - j);
        const int jj = std::clamp(j, 1, static_cast<int>(in.size()));
        num += w * in[jj - 1];
        den += w;
    }
    return num / den;
}

Tensor uniform_rgb(float v, int h, int w) { return Tensor({1, 3, h, w}, v); }

} // namespace

TEST(ImageTensor, RoundTripWithinOneLevel) {
    Gen g(1);
    const Tensor t = g.tensor({1, 3, 5, 7}, 0, 1);
    const Tensor back = to_tensor(to_image(t));
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(std::abs(back.values()[i] - t.values()[i]), 1.0f / 255.0f);
    Tensor wild = t;
    wild.values()[0] = 2.0f;
    wild.values()[1] = -1.0f;
    const Image img = to_image(wild);
    EXPECT_EQ(img.rgb[0], 255);
}

TEST(Png, SaveLoadIsBitIdentical) {
    Gen g(2);
    Image img{9, 4, {}};
    for (int i = 0; i < 9 * 4 * 3; ++i) img.rgb.push_back(static_cast<std::uint8_t>(g.integer(0, 255)));
    const fs::path p = temp_dir() / "roundtrip.png";
    save_png(img, p);
    EXPECT_EQ(load_png(p), img);
}

TEST(Png, SixteenBitIsRoundedToEightBits) {
    const std::vector<std::uint16_t> samples{0, 65535, 257 * 100 + 100, 257 * 100 - 100, 257 * 7 + 120, 40000};
    std::vector<std::uint8_t> bytes;
    for (std::uint16_t s : samples) {
        bytes.push_back(static_cast<std::uint8_t>(s >> 8));
        bytes.push_back(static_cast<std::uint8_t>(s & 0xFF));
    }
    const fs::path p = temp_dir() / "deep.png";
    write_raw_png(p, 2, 1, 16, 2, bytes);
    const Image img = load_png(p);
    ASSERT_EQ(img.width, 2);
    for (std::size_t i = 0; i < samples.size(); ++i)
        EXPECT_EQ(img.rgb[i], static_cast<int>(std::lround(samples[i] * 255.0 / 65535.0))) << i;
}

TEST(Png, GreyIsReplicatedAndAlphaDropped) {
    const fs::path p = temp_dir() / "grey.png";
    write_raw_png(p, 3, 1, 8, 0, {10, 20, 30});
    const Image g = load_png(p);
    EXPECT_EQ(g.rgb, (std::vector<std::uint8_t>{10, 10, 10, 20, 20, 20, 30, 30, 30}));
    const fs::path q = temp_dir() / "rgba.png";
    write_raw_png(q, 1, 1, 8, 6, {1, 2, 3, 4});
    EXPECT_EQ(load_png(q).rgb, (std::vector<std::uint8_t>{1, 2, 3}));
}

TEST(Png, TruncatedAndMalformedFail) {
    Image img{16, 16, std::vector<std::uint8_t>(16 * 16 * 3, 77)};
    const fs::path p = temp_dir() / "full.png";
    save_png(img, p);
    const auto size = fs::file_size(p);
    const fs::path cut = temp_dir() / "cut.png";
    fs::copy_file(p, cut, fs::copy_options::overwrite_existing);
    fs::resize_file(cut, size / 2);
    try {
        (void)load_png(cut);
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("cut.png"), std::string::npos);
    }
    const fs::path junk = temp_dir() / "junk.png";
    std::ofstream(junk) << "not a png at all";
    EXPECT_THROW(load_png(junk), IoError);
    EXPECT_THROW(load_png(temp_dir() / "missing.png"), IoError);
}

TEST(Bicubic, ScaleOneIsIdentity) {
    Gen g(3);
    const Tensor t = g.tensor({1, 3, 6, 5}, 0, 1);
    EXPECT_LE(max_abs_diff(bicubic_resize(t, 1.0), t), 1e-6f);
}

TEST(Bicubic, ConstantStaysConstant) {
    for (double s : {0.25, 1.0 / 3.0, 0.5, 2.0, 3.0, 1.7}) {
        const Tensor out = bicubic_resize(uniform_rgb(0.42f, 9, 12), s);
        EXPECT_EQ(out.h(), static_cast<int>(std::ceil(9 * s - 1e-9)));
        for (float v : out.values()) EXPECT_NEAR(v, 0.42f, 1e-6f);
    }
}

TEST(Bicubic, RampMatchesScalarOracle) {
    Gen g(4);
    for (double s : {0.5, 0.25, 2.0}) {
        const int w = 16;
        std::vector<double> row(w);
        Tensor img({1, 3, 4, w});
        for (int x = 0; x < w; ++x) {
            row[x] = x / 15.0 + (s == 0.25 ? g.uniform(-0.1f, 0.1f) : 0.0f);
            for (int c = 0; c < 3; ++c)
                for (int y = 0; y < 4; ++y) img.at(0, c, y, x) = static_cast<float>(row[x]);
        }
        const Tensor out = bicubic_resize(img, s);
        for (int x = 0; x < out.w(); ++x)
            for (int y = 0; y < out.h(); ++y)
                EXPECT_NEAR(out.at(0, 1, y, x), resample_oracle(row, x + 1, s), 1e-5) << "scale " << s << " x " << x;
    }
}

TEST(Bicubic, Errors) {
    EXPECT_THROW(bicubic_resize(uniform_rgb(0, 2, 2), 0.0), InputError);
    EXPECT_THROW(bicubic_resize(uniform_rgb(0, 2, 2), 0, 3, 1.0), InputError);
}

TEST(Metrics, UniformYErrorGivesTwentyDb) {
    Gen g(5);
    const Tensor hr = g.tensor({1, 3, 24, 24}, 0.1f, 0.5f);
    Tensor sr = hr;
    const float delta = 25.5f / 219.0f;
    for (float& v : sr.values()) v += delta;
    EXPECT_NEAR(psnr_y(sr, hr, 0), 20.0, 0.01);
    EXPECT_NEAR(psnr_y(sr, hr, 4), 20.0, 0.01);
    EXPECT_DOUBLE_EQ(psnr_y(sr, hr, 2), psnr_y(hr, sr, 2));
}

TEST(Metrics, IdenticalImages) {
    Gen g(6);
    const Tensor x = g.tensor({1, 3, 20, 20}, 0, 1);
    EXPECT_EQ(psnr_y(x, x, 2), kPsnrInfinity);
    EXPECT_EQ(ssim_y(x, x, 2), 1.0);
}

TEST(Metrics, PsnrMonotoneInNoise) {
    Gen g(7);
    const Tensor hr = g.tensor({1, 3, 16, 16}, 0.2f, 0.8f);
    const Tensor noise = g.tensor(hr.shape());
    double prev = kPsnrInfinity;
    for (float amp : {0.001f, 0.01f, 0.05f, 0.1f}) {
        Tensor sr = hr;
        for (std::size_t i = 0; i < sr.size(); ++i) sr.values()[i] += amp * noise.values()[i];
        const double p = psnr_y(sr, hr, 0);
        EXPECT_LT(p, prev);
        prev = p;
    }
}

TEST(Metrics, SsimRangeAndErrors) {
    Gen g(8);
    for (int trial = 0; trial < 5; ++trial) {
        const Tensor a = g.tensor({1, 3, 16, 16}, 0, 1), b = g.tensor({1, 3, 16, 16}, 0, 1);
        const double s = ssim_y(a, b, 0);
        EXPECT_GE(s, -1.0);
        EXPECT_LT(s, 1.0);
    }
    EXPECT_THROW(ssim_y(uniform_rgb(0, 12, 12), uniform_rgb(0, 12, 12), 1), InputError);
    EXPECT_THROW(psnr_y(uniform_rgb(0, 12, 12), uniform_rgb(0, 12, 13), 0), InputError);
}

TEST(Metrics, LumaCoefficients) {
    const Tensor white = uniform_rgb(1.0f, 1, 1);
    EXPECT_NEAR(rgb_to_y255(white).values()[0], 235.0, 1e-3);
    EXPECT_NEAR(rgb_to_y255(uniform_rgb(0.0f, 1, 1)).values()[0], 16.0, 1e-6);
}
