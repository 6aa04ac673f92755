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

#include "hypnos/ingest/edf.hpp"

namespace hypnos::testing {

// One scored night in the SleepEDF layout: a PSG file with an EEG channel
// and a second EDF+ file holding only the hypnogram. `labels` holds one
// scorer label per 30 s epoch ("Sleep stage W", "Sleep stage 4", ...).
struct NightSpec {
  std::string psg_name = "SC4001E0-PSG.edf";
  std::string hypnogram_name = "SC4001EC-Hypnogram.edf";
  std::string channel = "EEG Fpz-Cz";
  int sampling_rate_hz = 10;
  std::vector<std::string> labels;
  std::uint64_t seed = 1;
};

void write_sleepedf_night(const std::filesystem::path& dir, const NightSpec& night);

// Single-signal EDF with the given physical samples.
ingest::EdfSignalData make_signal(const std::string& label, int samples_per_record, std::vector<double> values);

}  // namespace hypnos::testing
