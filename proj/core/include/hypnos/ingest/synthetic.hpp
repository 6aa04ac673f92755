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
#include <filesystem>
#include <string>
#include <vector>

#include "hypnos/ingest/manifest.hpp"
#include "hypnos/random.hpp"

namespace hypnos::ingest {

// Toy polysomnography with independent subject and stage factors. Each
// stage owns a sinusoid frequency; each subject owns a gain, a background
// tone and an optional DC offset. Stages follow a sticky Markov chain.
struct SyntheticConfig {
  int subjects = 5;
  int epochs_per_subject = 400;
  int sampling_rate_hz = 4;
  double stage_amplitude = 0.4;
  double subject_offset = 0.0;      // offsets are uniform in [-x, x]
  double subject_tone_amplitude = 2.0;
  double gain_spread = 0.25;        // gains are uniform in [1-x, 1+x]
  double noise = 0.15;
  double stay_probability = 0.75;
  bool labeled = true;
  std::string subject_prefix = "S";
  std::uint64_t seed = kDefaultSeed;
};

// Cycles per epoch of the stage-specific sinusoid.
double synthetic_stage_frequency(SleepStage stage);

std::vector<EpochTable> make_synthetic(const SyntheticConfig& config);

// Writes canonical files plus "manifest.json" under dir; returns the manifest.
DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticConfig& config);

}  // namespace hypnos::ingest
