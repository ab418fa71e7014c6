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

#include <benchmark/benchmark.h>

#include <random>

#include "efdn/network.hpp"
#include "efdn/reparam.hpp"
#include "efdn/tensor.hpp"

namespace {

efdn::Tensor random_tensor(efdn::Shape4 s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    efdn::Tensor t(s);
    for (float& v : t.values()) v = u(rng);
    return t;
}

void BM_Conv2dFast(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    const efdn::ConvParams p = efdn::init_conv(c, c, 3, rng);
    const efdn::Tensor x = random_tensor({1, c, 64, 64}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(efdn::conv2d(x, p));
    state.SetItemsProcessed(state.iterations() * c * c * 9 * 64 * 64);
}
BENCHMARK(BM_Conv2dFast)->Arg(16)->Arg(48);

void BM_Conv2dReference(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    const efdn::ConvParams p = efdn::init_conv(c, c, 3, rng);
    const efdn::Tensor x = random_tensor({1, c, 64, 64}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(efdn::conv2d_reference(x, p));
    state.SetItemsProcessed(state.iterations() * c * c * 9 * 64 * 64);
}
BENCHMARK(BM_Conv2dReference)->Arg(16);

void BM_MergeEdbb(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const int c = static_cast<int>(state.range(0));
    const efdn::EdbbParams p = efdn::init_edbb(c, c, efdn::edbb_branch_kinds(), rng);
    for (auto _ : state) benchmark::DoNotOptimize(efdn::merge_edbb(p));
}
BENCHMARK(BM_MergeEdbb)->Arg(16)->Arg(48);

void BM_EfdnForward(benchmark::State& state) {
    const bool deploy = state.range(0) != 0;
    efdn::Model m = efdn::build_model(efdn::efdn_spec(4), 4);
    if (deploy) m = efdn::merge_model(m);
    const efdn::Tensor lr = random_tensor({1, 3, 64, 64}, 5);
    for (auto _ : state) benchmark::DoNotOptimize(efdn::model_forward(lr, m));
    state.SetLabel(deploy ? "deploy" : "train");
}
BENCHMARK(BM_EfdnForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
