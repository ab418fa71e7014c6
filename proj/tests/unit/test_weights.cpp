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

#include <cstring>
#include <filesystem>

#include <unistd.h>

#include "efdn/error.hpp"
#include "efdn/weights_file.hpp"
#include "test_support.hpp"

using namespace efdn;
namespace fs = std::filesystem;

namespace {

std::uint32_t read32(const std::vector<std::uint8_t>& b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
           static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

void write32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

struct Layout {
    std::size_t table = 0;               // offset of the tensor count
    std::vector<std::size_t> records;    // offset of each tensor record
    std::vector<std::size_t> ends;
};

// Walks the container independently of the decoder.
Layout walk(const std::vector<std::uint8_t>& b) {
    std::size_t p = 12;
    auto skip_str = [&] { p += 4 + read32(b, p); };
    skip_str();  // arch
    p += 12;     // scale, width, depth
    for (int list = 0; list < 2; ++list) {
        const std::uint32_t n = read32(b, p);
        p += 4;
        for (std::uint32_t i = 0; i < n; ++i) skip_str();
    }
    Layout l;
    l.table = p;
    const std::uint32_t count = read32(b, p);
    p += 4;
    for (std::uint32_t t = 0; t < count; ++t) {
        l.records.push_back(p);
        skip_str();
        const std::uint32_t rank = read32(b, p);
        p += 4;
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            numel *= read32(b, p);
            p += 4;
        }
        p += 4 * numel;
        l.ends.push_back(p);
    }
    EXPECT_EQ(p, b.size());
    return l;
}

Model tiny() {
    ModelSpec s = toy_spec(ToyKind::plain_fsrcnn_like, BlockKind::edbb, 2);
    s.width = 2;
    s.depth = 1;
    return build_model(s, 4);
}

} // namespace

TEST(Weights, HeaderLayout) {
    const auto b = encode_weights(tiny());
    EXPECT_EQ(std::memcmp(b.data(), "EFDW", 4), 0);
    EXPECT_EQ(read32(b, 4), 1u);
    EXPECT_EQ(read32(b, 8), 0u);
    EXPECT_EQ(read32(b, 12), std::string("fsrcnn_like").size());
    const auto d = encode_weights(merge_model(tiny()));
    EXPECT_EQ(read32(d, 8), 1u);
    const std::string text(b.begin(), b.end());
    for (const char* id : {"sobel_x_3x3", "sobel_y_3x3", "laplacian_4n"}) EXPECT_NE(text.find(id), std::string::npos);
}

TEST(Weights, RoundTripIsByteIdentical) {
    for (const Model& m : {tiny(), merge_model(tiny()), build_model(efdn_spec(3, 8), 2),
                           build_toy_net(ToyKind::plain_vdsr_like, BlockKind::baseline_conv, 2, 1)}) {
        const auto bytes = encode_weights(m);
        const Model back = decode_weights(bytes);
        EXPECT_EQ(back.spec(), m.spec());
        EXPECT_EQ(encode_weights(back), bytes);
        efdn::testing::Gen g(1);
        const Tensor x = g.tensor({1, 3, 5, 5});
        EXPECT_EQ(model_forward(x, back), model_forward(x, m));
    }
}

TEST(Weights, FileRoundTrip) {
    const fs::path p = fs::temp_directory_path() / ("efdn_w_" + std::to_string(::getpid()) + ".efdw");
    const Model m = tiny();
    save_weights(m, p);
    const Model back = load_weights(p);
    save_weights(back, p.string() + ".2");
    EXPECT_EQ(encode_weights(load_weights(p.string() + ".2")), encode_weights(m));
    EXPECT_THROW(load_weights(p.string() + ".missing"), IoError);
}

TEST(Weights, EveryTruncationIsRejected) {
    const auto bytes = encode_weights(tiny());
    for (std::size_t n = 0; n < bytes.size(); ++n) {
        const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<long>(n));
        EXPECT_THROW(decode_weights(cut), FormatError) << "prefix " << n;
    }
}

TEST(Weights, CorruptionsAreRejected) {
    const auto good = encode_weights(tiny());
    const Layout l = walk(good);

    auto bad = good;
    bad[0] = 'X';
    EXPECT_THROW(decode_weights(bad), FormatError);

    bad = good;
    write32(bad, 4, 2);
    EXPECT_THROW(decode_weights(bad), FormatError);

    bad = good;
    write32(bad, 8, 7);
    EXPECT_THROW(decode_weights(bad), FormatError);

    bad = good;
    bad.push_back(0);
    EXPECT_THROW(decode_weights(bad), FormatError);

    // Duplicate the first record and bump the count.
    bad = good;
    bad.insert(bad.begin() + static_cast<long>(l.ends[0]), good.begin() + static_cast<long>(l.records[0]),
               good.begin() + static_cast<long>(l.ends[0]));
    write32(bad, l.table, read32(good, l.table) + 1);
    EXPECT_THROW(decode_weights(bad), FormatError);

    // Drop the last record.
    bad.assign(good.begin(), good.begin() + static_cast<long>(l.records.back()));
    write32(bad, l.table, read32(good, l.table) - 1);
    EXPECT_THROW(decode_weights(bad), FormatError);

    // Declared dims disagree with the layout (first dim of the first tensor).
    bad = good;
    const std::size_t dims_at = l.records[0] + 4 + read32(good, l.records[0]) + 4;
    write32(bad, dims_at, read32(good, dims_at) + 1);
    EXPECT_THROW(decode_weights(bad), FormatError);

    // Unknown filter constant.
    bad = good;
    const std::string text(good.begin(), good.end());
    const auto at = text.find("laplacian_4n");
    ASSERT_NE(at, std::string::npos);
    bad[at + 10] = '8';
    EXPECT_THROW(decode_weights(bad), FormatError);
}

TEST(Weights, RecordsAreReorderable) {
    const auto good = encode_weights(tiny());
    const Layout l = walk(good);
    std::vector<std::uint8_t> swapped(good.begin(), good.begin() + static_cast<long>(l.records[0]));
    swapped.insert(swapped.end(), good.begin() + static_cast<long>(l.records[1]),
                   good.begin() + static_cast<long>(l.ends[1]));
    swapped.insert(swapped.end(), good.begin() + static_cast<long>(l.records[0]),
                   good.begin() + static_cast<long>(l.ends[0]));
    swapped.insert(swapped.end(), good.begin() + static_cast<long>(l.ends[1]), good.end());
    EXPECT_EQ(encode_weights(decode_weights(swapped)), good);
}
