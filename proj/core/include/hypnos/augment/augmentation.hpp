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

#include <cstddef>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hypnos/types.hpp"

namespace hypnos::augment {

enum class ViewMode {
  kOneOf,    // each view applies one method chosen uniformly
  kCompose,  // each view permutes chunks, then crops and resizes
};

struct AugmentationConfig {
  bool enabled = true;
  ViewMode mode = ViewMode::kOneOf;
  int min_chunks = 4;
  int max_chunks = 8;
  double min_crop_ratio = 0.5;
  double max_crop_ratio = 0.9;

  // Throws ConfigError on an empty or out-of-range interval.
  void validate() const;
};

using Rng = std::mt19937_64;

// Splits at the given sorted cut points (exclusive ends of all but the last
// chunk) and concatenates the chunks in `order`.
std::vector<float> permute_chunks(std::span<const float> samples, std::span<const std::size_t> cuts,
                                  std::span<const std::size_t> order);

// Random contiguous split into n_chunks pieces, randomly reordered.
// Throws ConfigError unless 1 <= n_chunks <= samples.size().
std::vector<float> permute_chunks(std::span<const float> samples, int n_chunks, Rng& rng);

// Linearly resamples samples[start, start + length) back to the input length.
// Throws ConfigError when length < 2 or the window leaves the signal.
std::vector<float> crop_resize(std::span<const float> samples, std::size_t start, std::size_t length);

// Random window of round(crop_ratio * N) samples. Throws ConfigError when
// crop_ratio is outside (0, 1] or the window is shorter than 2 samples.
std::vector<float> crop_resize(std::span<const float> samples, double crop_ratio, Rng& rng);

// One stochastic view under `config`.
std::vector<float> augment(std::span<const float> samples, const AugmentationConfig& config, Rng& rng);

// Two independent views; both inherit the source's subject and index.
std::pair<Epoch, Epoch> make_views(const Epoch& epoch, const AugmentationConfig& config, Rng& rng);
std::pair<LabeledEpoch, LabeledEpoch> make_views(const LabeledEpoch& epoch,
                                                 const AugmentationConfig& config, Rng& rng);

// Two views per input, views of source k at positions 2k and 2k + 1.
std::vector<LabeledEpoch> augment_dataset(const std::vector<LabeledEpoch>& epochs,
                                          const AugmentationConfig& config, Rng& rng);

}  // namespace hypnos::augment
