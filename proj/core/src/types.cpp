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

#include "hypnos/types.hpp"

#include <algorithm>
#include <cmath>

#include "hypnos/error.hpp"

namespace hypnos {

SleepStage stage_from_index(int index) {
  if (index < 0 || index >= kNumStages) {
    throw LabelError("stage index " + std::to_string(index) + " outside 0..4");
  }
  return static_cast<SleepStage>(index);
}

std::string_view stage_name(SleepStage s) {
  switch (s) {
    case SleepStage::kW:
      return "W";
    case SleepStage::kN1:
      return "N1";
    case SleepStage::kN2:
      return "N2";
    case SleepStage::kN3:
      return "N3";
    case SleepStage::kRem:
      return "REM";
  }
  return "?";
}

std::optional<SleepStage> parse_stage_name(std::string_view name) {
  for (SleepStage s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  if (name == "R") return SleepStage::kRem;
  return std::nullopt;
}

void Epoch::validate() const {
  if (sampling_rate_hz <= 0) throw ShapeError("epoch sampling rate must be positive");
  if (samples.size() != samples_per_epoch(sampling_rate_hz)) {
    throw ShapeError("epoch has " + std::to_string(samples.size()) + " samples, expected " +
                     std::to_string(samples_per_epoch(sampling_rate_hz)));
  }
  for (float v : samples) {
    if (!std::isfinite(v)) throw ShapeError("epoch contains a non-finite sample");
  }
}

EpochTable::EpochTable(std::string subject_id, int sampling_rate_hz, std::string channel)
    : subject_id_(std::move(subject_id)),
      sampling_rate_hz_(sampling_rate_hz),
      channel_(std::move(channel)) {
  if (sampling_rate_hz_ <= 0) throw ShapeError("sampling rate must be positive");
}

EpochTable EpochTable::from_labeled(const std::vector<LabeledEpoch>& epochs, std::string channel) {
  if (epochs.empty()) throw EmptyDatasetError("no epochs to tabulate");
  const Epoch& first = epochs.front().epoch;
  EpochTable table(first.subject_id, first.sampling_rate_hz, std::move(channel));
  for (const LabeledEpoch& le : epochs) {
    if (le.epoch.subject_id != table.subject_id_ ||
        le.epoch.sampling_rate_hz != table.sampling_rate_hz_) {
      throw ShapeError("epochs in a table must share subject and sampling rate");
    }
    table.append(le.epoch.samples, le.stage, le.epoch.index);
  }
  return table;
}

void EpochTable::append(std::span<const float> samples, std::optional<SleepStage> stage,
                        std::int64_t index) {
  if (samples.size() != epoch_length()) {
    throw ShapeError("appended epoch has " + std::to_string(samples.size()) +
                     " samples, expected " + std::to_string(epoch_length()));
  }
  samples_.insert(samples_.end(), samples.begin(), samples.end());
  stage_codes_.push_back(stage ? static_cast<std::uint8_t>(*stage) : kUnlabeled);
  epoch_index_.push_back(index);
}

std::span<const float> EpochTable::samples(std::size_t row) const {
  const std::size_t n = epoch_length();
  return std::span<const float>(samples_).subspan(row * n, n);
}

SleepStage EpochTable::stage(std::size_t row) const {
  if (!labeled(row)) throw LabelError("row " + std::to_string(row) + " is unlabeled");
  return stage_from_index(stage_codes_[row]);
}

Epoch EpochTable::epoch(std::size_t row) const {
  auto s = samples(row);
  return Epoch{std::vector<float>(s.begin(), s.end()), sampling_rate_hz_, subject_id_,
               epoch_index_[row]};
}

EpochTable EpochTable::without_labels() const {
  EpochTable copy = *this;
  std::fill(copy.stage_codes_.begin(), copy.stage_codes_.end(), kUnlabeled);
  return copy;
}

}  // namespace hypnos
