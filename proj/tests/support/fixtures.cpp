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

#include "fixtures.hpp"

#include <cmath>
#include <random>

namespace hypnos::testing {

ingest::EdfSignalData make_signal(const std::string& label, int samples_per_record, std::vector<double> values) {
  ingest::EdfSignalData s;
  s.header.label = label;
  s.header.physical_dimension = "uV";
  s.header.physical_min = -500.0;
  s.header.physical_max = 500.0;
  s.header.digital_min = -32768;
  s.header.digital_max = 32767;
  s.header.samples_per_record = samples_per_record;
  s.physical = std::move(values);
  return s;
}

void write_sleepedf_night(const std::filesystem::path& dir, const NightSpec& night) {
  std::filesystem::create_directories(dir);
  const std::size_t n = night.labels.size() * 30 * static_cast<std::size_t>(night.sampling_rate_hz);
  std::mt19937_64 rng(night.seed);
  std::normal_distribution<double> noise(0.0, 20.0);
  std::vector<double> eeg(n);
  for (std::size_t i = 0; i < n; ++i) eeg[i] = 50.0 * std::sin(0.01 * static_cast<double>(i)) + noise(rng);
  std::vector<double> other(n, 0.0);

  ingest::EdfWriteRequest psg;
  psg.record_duration_s = 30.0;
  psg.signals.push_back(make_signal(night.channel, 30 * night.sampling_rate_hz, eeg));
  psg.signals.push_back(make_signal("EEG Pz-Oz", 30 * night.sampling_rate_hz, other));
  ingest::write_edf(dir / night.psg_name, psg);

  ingest::EdfWriteRequest hyp;
  hyp.record_duration_s = 30.0;
  for (std::size_t i = 0; i < night.labels.size(); ++i) {
    hyp.annotations.push_back({30.0 * static_cast<double>(i), 30.0, night.labels[i]});
  }
  ingest::write_edf(dir / night.hypnogram_name, hyp);
}

}  // namespace hypnos::testing
