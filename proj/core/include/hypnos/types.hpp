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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypnos {

// AASM stages after N4 has been merged into N3.
enum class SleepStage : std::uint8_t { kW = 0, kN1 = 1, kN2 = 2, kN3 = 3, kRem = 4 };

inline constexpr int kNumStages = 5;
inline constexpr int kEpochSeconds = 30;
inline constexpr std::array<SleepStage, kNumStages> kAllStages = {
    SleepStage::kW, SleepStage::kN1, SleepStage::kN2, SleepStage::kN3, SleepStage::kRem};

constexpr int stage_index(SleepStage s) { return static_cast<int>(s); }
SleepStage stage_from_index(int index);  // throws LabelError outside 0..4
std::string_view stage_name(SleepStage s);
std::optional<SleepStage> parse_stage_name(std::string_view name);

constexpr std::size_t samples_per_epoch(int sampling_rate_hz) {
  return static_cast<std::size_t>(kEpochSeconds) * static_cast<std::size_t>(sampling_rate_hz);
}

// One 30-second single-channel window.
struct Epoch {
  std::vector<float> samples;
  int sampling_rate_hz = 0;
  std::string subject_id;
  // Position on the recording timeline in epoch units; used to keep
  // sequences temporally contiguous after epochs are dropped.
  std::int64_t index = 0;

  // Throws ShapeError when the length is not 30 x rate or a sample is not finite.
  void validate() const;
};

struct LabeledEpoch {
  Epoch epoch;
  SleepStage stage = SleepStage::kW;
};

// Columnar per-subject store of equally sized epochs; the in-memory mirror of
// a canonical subject file.
class EpochTable {
 public:
  static constexpr std::uint8_t kUnlabeled = 0xFF;

  EpochTable() = default;
  EpochTable(std::string subject_id, int sampling_rate_hz, std::string channel = {});

  static EpochTable from_labeled(const std::vector<LabeledEpoch>& epochs, std::string channel = {});

  void append(std::span<const float> samples, std::optional<SleepStage> stage, std::int64_t index);

  const std::string& subject_id() const { return subject_id_; }
  int sampling_rate_hz() const { return sampling_rate_hz_; }
  const std::string& channel() const { return channel_; }
  std::size_t epoch_length() const { return samples_per_epoch(sampling_rate_hz_); }
  std::size_t size() const { return stage_codes_.size(); }
  bool empty() const { return stage_codes_.empty(); }

  std::span<const float> samples(std::size_t row) const;
  std::span<const float> all_samples() const { return samples_; }
  bool labeled(std::size_t row) const { return stage_codes_[row] != kUnlabeled; }
  SleepStage stage(std::size_t row) const;  // throws LabelError on unlabeled rows
  std::uint8_t stage_code(std::size_t row) const { return stage_codes_[row]; }
  std::int64_t epoch_index(std::size_t row) const { return epoch_index_[row]; }

  const std::vector<std::uint8_t>& stage_codes() const { return stage_codes_; }
  const std::vector<std::int64_t>& epoch_indices() const { return epoch_index_; }

  Epoch epoch(std::size_t row) const;

  // Same samples with every stage code cleared.
  EpochTable without_labels() const;

  friend bool operator==(const EpochTable&, const EpochTable&) = default;

 private:
  std::string subject_id_;
  int sampling_rate_hz_ = 0;
  std::string channel_;
  std::vector<float> samples_;
  std::vector<std::uint8_t> stage_codes_;
  std::vector<std::int64_t> epoch_index_;
};

// T temporally contiguous rows of one subject's EpochTable.
struct EpochSequence {
  std::string subject_id;
  std::size_t first_row = 0;
  std::size_t length = 0;
  // Present when every row in the window is labeled.
  std::optional<std::vector<SleepStage>> stages;
};

}  // namespace hypnos
