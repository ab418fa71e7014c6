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
#include <string>
#include <vector>

#include "efdn/network.hpp"

namespace efdn {

inline constexpr char kWeightsMagic[4] = {'E', 'F', 'D', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 1;

/// Serialized EFDW container. Layout (all integers u32 little-endian):
///
///   "EFDW" version mode(0 train, 1 deploy)
///   arch(len + utf8) scale width depth
///   branch kinds: count, then len + utf8 each
///   filter constants: count, then len + utf8 each
///   tensors: count, then per tensor name(len + utf8) rank dims... f32 data
std::vector<std::uint8_t> encode_weights(const Model& m);

/// Parses and validates a container. Throws FormatError on malformed input
/// (bad magic, unknown version, truncation, duplicate or missing names,
/// dims that do not match the layout, trailing bytes).
Model decode_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const Model& m, const std::filesystem::path& path);
Model load_weights(const std::filesystem::path& path);

} // namespace efdn
