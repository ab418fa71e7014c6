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
#include <vector>

#include "efdn/tensor.hpp"
#include "efdn/train.hpp"

namespace efdn {

/// Procedural HR crops cycling through three families: hard-edged shapes,
/// smooth colour gradients and periodic textures. Deterministic in `seed`.
std::vector<Tensor> synthetic_images(int count, int size, std::uint64_t seed);

/// LR/HR pairs via bicubic downscaling by 1/scale. HR sides must be divisible
/// by scale.
std::vector<Sample> make_samples(const std::vector<Tensor>& hr_images, int scale);

/// Sorted *.png paths of a directory. Throws InputError if there are none.
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

} // namespace efdn
