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

#pragma once

#include <cstdint>
#include <random>

namespace hypnos {

// Every stochastic component draws from its own stream expanded from one
// root seed, so any component can be replayed in isolation.
enum class SeedPurpose : std::uint64_t {
  kAugmentation = 1,
  kInitialization = 2,
  kBatching = 3,
  kLatentSampling = 4,
  kValidation = 5,
  kSplit = 6,
  kSynthetic = 7,
  kDropout = 8,
  kProbe = 9,
};

std::uint64_t splitmix64(std::uint64_t x);

constexpr std::uint64_t kDefaultSeed = 20240611;

std::uint64_t derive_seed(std::uint64_t root, SeedPurpose purpose, std::uint64_t stream = 0);

inline std::mt19937_64 make_rng(std::uint64_t root, SeedPurpose purpose, std::uint64_t stream = 0) {
  return std::mt19937_64(derive_seed(root, purpose, stream));
}

}  // namespace hypnos
