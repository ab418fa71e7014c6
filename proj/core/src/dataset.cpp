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

#include "efdn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "efdn/error.hpp"
#include "efdn/imaging.hpp"

namespace efdn {

namespace {

using Rng = std::mt19937_64;

struct Color {
    float v[3];
};

Color random_color(Rng& rng) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    return {{u(rng), u(rng), u(rng)}};
}

void paint(Tensor& t, int y, int x, const Color& c) {
    for (int ch = 0; ch < 3; ++ch) {
        t.at(0, ch, y, x) = c.v[ch];
    }
}

// Background plus a few rectangles, discs and half-planes with sharp borders.
Tensor edges_image(int size, Rng& rng) {
    Tensor t({1, 3, size, size});
    const Color bg = random_color(rng);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            paint(t, y, x, bg);
        }
    }
    std::uniform_real_distribution<double> pos(0.0, size);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const int shapes = std::uniform_int_distribution<int>(3, 6)(rng);
    for (int s = 0; s < shapes; ++s) {
        const Color c = random_color(rng);
        const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
        const double cx = pos(rng), cy = pos(rng);
        const double r = std::uniform_real_distribution<double>(size / 10.0, size / 3.0)(rng);
        const double th = angle(rng);
        const double nx = std::cos(th), ny = std::sin(th);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                bool inside = false;
                if (kind == 0) {
                    const double u = dx * nx + dy * ny, v = -dx * ny + dy * nx;
                    inside = std::abs(u) < r && std::abs(v) < r * 0.6;
                } else if (kind == 1) {
                    inside = dx * dx + dy * dy < r * r;
                } else {
                    inside = dx * nx + dy * ny > 0.0 && dx * dx + dy * dy < 4.0 * r * r;
                }
                if (inside) {
                    paint(t, y, x, c);
                }
            }
        }
    }
    return t;
}

// Linear or radial blend between two colours.
Tensor gradient_image(int size, Rng& rng) {
    Tensor t({1, 3, size, size});
    const Color a = random_color(rng), b = random_color(rng);
    const double th = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    const bool radial = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    const double cx = std::uniform_real_distribution<double>(0.0, size)(rng);
    const double cy = std::uniform_real_distribution<double>(0.0, size)(rng);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double f;
            if (radial) {
                f = std::hypot(x - cx, y - cy) / (size * std::numbers::sqrt2);
            } else {
                f = ((x - size / 2.0) * std::cos(th) + (y - size / 2.0) * std::sin(th)) / size + 0.5;
            }
            f = std::clamp(f, 0.0, 1.0);
            for (int ch = 0; ch < 3; ++ch) {
                t.at(0, ch, y, x) = static_cast<float>((1.0 - f) * a.v[ch] + f * b.v[ch]);
            }
        }
    }
    return t;
}

// Sum of two oriented gratings, optionally modulated by a checkerboard.
Tensor texture_image(int size, Rng& rng) {
    Tensor t({1, 3, size, size});
    const Color a = random_color(rng), b = random_color(rng);
    std::uniform_real_distribution<double> freq(0.05, 0.35);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    const double f1 = freq(rng), f2 = freq(rng), t1 = angle(rng), t2 = angle(rng);
    const int checker = std::uniform_int_distribution<int>(0, 1)(rng) ? std::uniform_int_distribution<int>(3, 9)(rng)
                                                                        : 0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double v = 0.25 * std::sin(2.0 * std::numbers::pi * f1 * (x * std::cos(t1) + y * std::sin(t1))) +
                       0.25 * std::sin(2.0 * std::numbers::pi * f2 * (x * std::cos(t2) + y * std::sin(t2))) + 0.5;
            if (checker > 0 && ((x / checker + y / checker) % 2 == 1)) {
                v = 1.0 - v;
            }
            v = std::clamp(v, 0.0, 1.0);
            for (int ch = 0; ch < 3; ++ch) {
                t.at(0, ch, y, x) = static_cast<float>((1.0 - v) * a.v[ch] + v * b.v[ch]);
            }
        }
    }
    return t;
}

} // namespace

std::vector<Tensor> synthetic_images(int count, int size, std::uint64_t seed) {
    if (count < 0 || size < 1) {
        throw InputError("synthetic_images: count must be >= 0 and size >= 1");
    }
    Rng rng(seed);
    std::vector<Tensor> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        switch (i % 3) {
        case 0:
            out.push_back(edges_image(size, rng));
            break;
        case 1:
            out.push_back(gradient_image(size, rng));
            break;
        default:
            out.push_back(texture_image(size, rng));
            break;
        }
    }
    return out;
}

std::vector<Sample> make_samples(const std::vector<Tensor>& hr_images, int scale) {
    if (scale < 1) {
        throw InputError("make_samples: scale must be >= 1");
    }
    std::vector<Sample> out;
    out.reserve(hr_images.size());
    for (const Tensor& hr : hr_images) {
        if (hr.h() % scale != 0 || hr.w() % scale != 0) {
            throw InputError("HR image " + to_string(hr.shape()) + " not divisible by scale " + std::to_string(scale));
        }
        Tensor lr = bicubic_resize(hr, hr.h() / scale, hr.w() / scale, 1.0 / scale);
        out.push_back({std::move(lr), hr});
    }
    return out;
}

std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw IoError(dir.string() + ": not a directory");
    }
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") {
            out.push_back(entry.path());
        }
    }
    if (out.empty()) {
        throw InputError(dir.string() + ": no PNG images found");
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace efdn
