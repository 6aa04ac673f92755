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

#include "hypnos/augment/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypnos/error.hpp"

namespace hypnos::augment {

void AugmentationConfig::validate() const {
  if (min_chunks < 1 || max_chunks < min_chunks) {
    throw ConfigError("augmentation chunk range must satisfy 1 <= min <= max");
  }
  if (!(min_crop_ratio > 0.0 && max_crop_ratio <= 1.0 && min_crop_ratio <= max_crop_ratio)) {
    throw ConfigError("augmentation crop ratio range must lie in (0, 1]");
  }
}

std::vector<float> permute_chunks(std::span<const float> samples, std::span<const std::size_t> cuts,
                                  std::span<const std::size_t> order) {
  const std::size_t n_chunks = cuts.size() + 1;
  if (order.size() != n_chunks) throw ConfigError("chunk order must name every chunk once");
  std::vector<std::size_t> bounds;
  bounds.reserve(n_chunks + 1);
  bounds.push_back(0);
  for (std::size_t c : cuts) {
    if (c <= bounds.back() || c >= samples.size()) throw ConfigError("chunk cut points must be increasing and interior");
    bounds.push_back(c);
  }
  bounds.push_back(samples.size());

  std::vector<bool> used(n_chunks, false);
  std::vector<float> out;
  out.reserve(samples.size());
  for (std::size_t idx : order) {
    if (idx >= n_chunks || used[idx]) throw ConfigError("chunk order must be a permutation");
    used[idx] = true;
    out.insert(out.end(), samples.begin() + static_cast<std::ptrdiff_t>(bounds[idx]),
               samples.begin() + static_cast<std::ptrdiff_t>(bounds[idx + 1]));
  }
  return out;
}

std::vector<float> permute_chunks(std::span<const float> samples, int n_chunks, Rng& rng) {
  if (n_chunks < 1 || static_cast<std::size_t>(n_chunks) > samples.size()) {
    throw ConfigError("n_chunks=" + std::to_string(n_chunks) + " outside [1, " +
                      std::to_string(samples.size()) + "]");
  }
  // Cut points drawn without replacement from the N-1 interior positions.
  std::vector<std::size_t> cuts;
  if (n_chunks > 1) {
    std::vector<std::size_t> interior(samples.size() - 1);
    std::iota(interior.begin(), interior.end(), std::size_t{1});
    std::sample(interior.begin(), interior.end(), std::back_inserter(cuts),
                static_cast<std::size_t>(n_chunks - 1), rng);
    std::sort(cuts.begin(), cuts.end());
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(n_chunks));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  return permute_chunks(samples, cuts, order);
}

std::vector<float> crop_resize(std::span<const float> samples, std::size_t start, std::size_t length) {
  if (length < 2) throw ConfigError("cropped window must hold at least 2 samples");
  if (start + length > samples.size()) throw ConfigError("crop window extends past the signal");
  const std::size_t n = samples.size();
  std::vector<float> out(n);
  if (n == 1) {
    out[0] = samples[start];
    return out;
  }
  const double scale = static_cast<double>(length - 1) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double pos = static_cast<double>(j) * scale;
    auto left = static_cast<std::size_t>(pos);
    if (left >= length - 1) left = length - 2;
    const double frac = pos - static_cast<double>(left);
    const double a = samples[start + left];
    const double b = samples[start + left + 1];
    out[j] = static_cast<float>(a + frac * (b - a));
  }
  return out;
}

std::vector<float> crop_resize(std::span<const float> samples, double crop_ratio, Rng& rng) {
  if (!(crop_ratio > 0.0 && crop_ratio <= 1.0)) throw ConfigError("crop_ratio must lie in (0, 1]");
  const auto length = static_cast<std::size_t>(std::llround(crop_ratio * static_cast<double>(samples.size())));
  if (length < 2) throw ConfigError("crop_ratio leaves fewer than 2 samples");
  std::uniform_int_distribution<std::size_t> start_dist(0, samples.size() - length);
  return crop_resize(samples, start_dist(rng), length);
}

namespace {

std::vector<float> random_permute(std::span<const float> samples, const AugmentationConfig& c, Rng& rng) {
  std::uniform_int_distribution<int> chunks(c.min_chunks, c.max_chunks);
  const int n = std::min<int>(chunks(rng), static_cast<int>(samples.size()));
  return permute_chunks(samples, n, rng);
}

std::vector<float> random_crop(std::span<const float> samples, const AugmentationConfig& c, Rng& rng) {
  std::uniform_real_distribution<double> ratio(c.min_crop_ratio, c.max_crop_ratio);
  const double r = c.min_crop_ratio == c.max_crop_ratio ? c.min_crop_ratio : ratio(rng);
  return crop_resize(samples, r, rng);
}

}  // namespace

std::vector<float> augment(std::span<const float> samples, const AugmentationConfig& config, Rng& rng) {
  if (!config.enabled) return std::vector<float>(samples.begin(), samples.end());
  if (config.mode == ViewMode::kCompose) {
    auto permuted = random_permute(samples, config, rng);
    return random_crop(permuted, config, rng);
  }
  std::bernoulli_distribution coin(0.5);
  return coin(rng) ? random_permute(samples, config, rng) : random_crop(samples, config, rng);
}

std::pair<Epoch, Epoch> make_views(const Epoch& epoch, const AugmentationConfig& config, Rng& rng) {
  Epoch a = epoch;
  Epoch b = epoch;
  a.samples = augment(epoch.samples, config, rng);
  b.samples = augment(epoch.samples, config, rng);
  return {std::move(a), std::move(b)};
}

std::pair<LabeledEpoch, LabeledEpoch> make_views(const LabeledEpoch& epoch,
                                                 const AugmentationConfig& config, Rng& rng) {
  auto [a, b] = make_views(epoch.epoch, config, rng);
  return {LabeledEpoch{std::move(a), epoch.stage}, LabeledEpoch{std::move(b), epoch.stage}};
}

std::vector<LabeledEpoch> augment_dataset(const std::vector<LabeledEpoch>& epochs,
                                          const AugmentationConfig& config, Rng& rng) {
  std::vector<LabeledEpoch> out;
  out.reserve(2 * epochs.size());
  for (const auto& e : epochs) {
    auto [a, b] = make_views(e, config, rng);
    out.push_back(std::move(a));
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace hypnos::augment
