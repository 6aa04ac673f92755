// Copyright 2026 The Hypnos Authors.
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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "hypnos/augment/augmentation.hpp"
#include "hypnos/eval/emd.hpp"
#include "hypnos/random.hpp"

namespace {

std::vector<float> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal;
  std::vector<float> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

void BM_Augment(benchmark::State& state) {
  const auto epoch = noise(static_cast<std::size_t>(state.range(0)), 1);
  hypnos::augment::AugmentationConfig config;
  auto rng = hypnos::make_rng(1, hypnos::SeedPurpose::kAugmentation, 0);
  for (auto _ : state) benchmark::DoNotOptimize(hypnos::augment::augment(epoch, config, rng));
}
BENCHMARK(BM_Augment)->Arg(120)->Arg(3000);

void BM_Wasserstein(benchmark::State& state) {
  const auto a = noise(static_cast<std::size_t>(state.range(0)), 2);
  const auto b = noise(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(hypnos::eval::wasserstein1(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Wasserstein)->Arg(1000)->Arg(100000);

}  // namespace
