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

#include "hypnos/ingest/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "hypnos/error.hpp"
#include "hypnos/ingest/canonical.hpp"

namespace hypnos::ingest {

double synthetic_stage_frequency(SleepStage stage) {
  static constexpr double kCycles[kNumStages] = {2.0, 5.0, 9.0, 14.0, 20.0};
  return kCycles[stage_index(stage)];
}

std::vector<EpochTable> make_synthetic(const SyntheticConfig& c) {
  if (c.subjects < 1 || c.epochs_per_subject < 1 || c.sampling_rate_hz < 1) {
    throw ConfigError("synthetic dataset needs positive subjects, epochs and rate");
  }
  const std::size_t n = samples_per_epoch(c.sampling_rate_hz);
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<EpochTable> out;
  for (int s = 0; s < c.subjects; ++s) {
    auto rng = make_rng(c.seed, SeedPurpose::kSynthetic, static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, c.noise);
    const double offset = c.subject_offset * (2.0 * unit(rng) - 1.0);
    const double gain = 1.0 + c.gain_spread * (2.0 * unit(rng) - 1.0);
    // Background tones share one band between the stage frequencies and Nyquist.
    const double tone = 24.0 + 16.0 * unit(rng);
    char id[32];
    std::snprintf(id, sizeof id, "%s%02d", c.subject_prefix.c_str(), s);
    EpochTable table(id, c.sampling_rate_hz, "SYN");
    int stage = static_cast<int>(unit(rng) * kNumStages) % kNumStages;
    std::vector<float> samples(n);
    for (int e = 0; e < c.epochs_per_subject; ++e) {
      if (e > 0 && unit(rng) >= c.stay_probability) {
        stage = (stage + 1 + static_cast<int>(unit(rng) * (kNumStages - 1))) % kNumStages;
      }
      const double f = synthetic_stage_frequency(static_cast<SleepStage>(stage));
      const double phase = two_pi * unit(rng);
      const double tone_phase = two_pi * unit(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n);
        const double v = c.stage_amplitude * std::sin(two_pi * f * t + phase) +
                         c.subject_tone_amplitude * std::sin(two_pi * tone * t + tone_phase) + offset +
                         noise(rng);
        samples[i] = static_cast<float>(gain * v);
      }
      const auto label = c.labeled ? std::optional(static_cast<SleepStage>(stage)) : std::nullopt;
      table.append(samples, label, e);
    }
    out.push_back(std::move(table));
  }
  return out;
}

DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticConfig& config) {
  std::filesystem::create_directories(dir);
  DatasetManifest m;
  m.dataset_kind = "synthetic";
  m.channel = "SYN";
  m.sampling_rate_hz = config.sampling_rate_hz;
  for (const auto& table : make_synthetic(config)) {
    const std::string file = table.subject_id() + ".hyc";
    write_canonical(dir / file, table);
    m.subjects.push_back({table.subject_id(), file, {}, table.size()});
  }
  m.save(dir / "manifest.json");
  m.base_dir = dir;
  return m;
}

}  // namespace hypnos::ingest
