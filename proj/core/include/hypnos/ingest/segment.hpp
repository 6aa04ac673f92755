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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hypnos/types.hpp"

namespace hypnos::ingest {

// Scorer vocabulary before harmonization.
enum class RawStage { kW, kN1, kN2, kN3, kN4, kRem, kMovement, kUnknown };

// N4 folds into N3; movement and unknown have no harmonized stage.
std::optional<SleepStage> harmonize(RawStage raw);

// "Sleep stage W", "Sleep stage 4", "Movement time", "Sleep stage ?" ...
std::optional<RawStage> parse_sleepedf_label(std::string_view text);
// NSRR concepts such as "Stage 2 sleep|2" or "REM sleep|5".
std::optional<RawStage> parse_nsrr_concept(std::string_view concept_text);

struct RawAnnotation {
  double onset_s = 0.0;
  double duration_s = 0.0;
  RawStage stage = RawStage::kUnknown;
};

struct SegmentOptions {
  // Keep only this many minutes of wake on either side of the first and
  // last non-wake epoch; nullopt keeps every scored epoch.
  std::optional<int> wake_edge_minutes;
};

// Cuts a recording into 30 s epochs and attaches harmonized stages.
// Trailing partial windows are dropped. Throws AlignmentError when
// annotations are off the 30 s grid or disagree with the signal length by
// more than one epoch.
std::vector<LabeledEpoch> segment_and_label(std::span<const double> samples, int sampling_rate_hz,
                                            std::span<const RawAnnotation> annotations,
                                            const std::string& subject_id,
                                            const SegmentOptions& options = {});

// Epochs of an unscored recording.
std::vector<Epoch> segment_unlabeled(std::span<const double> samples, int sampling_rate_hz,
                                     const std::string& subject_id);

struct SequenceWarning {
  std::string subject_id;
  std::size_t available_epochs = 0;
};

struct SequenceBuild {
  std::vector<EpochSequence> sequences;
  std::vector<SequenceWarning> warnings;
};

// Sliding windows of `length` epochs advanced by `stride`, restricted to
// temporally contiguous runs of the table. Runs shorter than `length` emit
// nothing; a subject with no full window is reported in `warnings`.
SequenceBuild build_sequences(const EpochTable& table, std::size_t length, std::size_t stride);

// Number of windows the builder emits for a contiguous run of n epochs.
std::size_t expected_window_count(std::size_t n, std::size_t length, std::size_t stride);

}  // namespace hypnos::ingest
