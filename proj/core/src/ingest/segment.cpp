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

#include "hypnos/ingest/segment.hpp"

#include <algorithm>
#include <cmath>

#include "hypnos/error.hpp"

namespace hypnos::ingest {
namespace {

// Tolerance when checking that onsets sit on the 30 s grid.
constexpr double kGridTolerance = 1e-3;

bool on_grid(double seconds) {
  const double k = seconds / kEpochSeconds;
  return std::abs(k - std::round(k)) * kEpochSeconds < kGridTolerance;
}

}  // namespace

std::optional<SleepStage> harmonize(RawStage raw) {
  switch (raw) {
    case RawStage::kW:
      return SleepStage::kW;
    case RawStage::kN1:
      return SleepStage::kN1;
    case RawStage::kN2:
      return SleepStage::kN2;
    case RawStage::kN3:
    case RawStage::kN4:
      return SleepStage::kN3;
    case RawStage::kRem:
      return SleepStage::kRem;
    case RawStage::kMovement:
    case RawStage::kUnknown:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<RawStage> parse_sleepedf_label(std::string_view text) {
  if (text == "Sleep stage W") return RawStage::kW;
  if (text == "Sleep stage 1") return RawStage::kN1;
  if (text == "Sleep stage 2") return RawStage::kN2;
  if (text == "Sleep stage 3") return RawStage::kN3;
  if (text == "Sleep stage 4") return RawStage::kN4;
  if (text == "Sleep stage R") return RawStage::kRem;
  if (text == "Movement time") return RawStage::kMovement;
  if (text == "Sleep stage ?") return RawStage::kUnknown;
  return std::nullopt;
}

std::optional<RawStage> parse_nsrr_concept(std::string_view concept_text) {
  const auto bar = concept_text.find('|');
  if (bar == std::string_view::npos) return std::nullopt;
  const std::string_view code = concept_text.substr(bar + 1);
  if (code == "0") return RawStage::kW;
  if (code == "1") return RawStage::kN1;
  if (code == "2") return RawStage::kN2;
  if (code == "3") return RawStage::kN3;
  if (code == "4") return RawStage::kN4;
  if (code == "5") return RawStage::kRem;
  if (code == "6") return RawStage::kMovement;
  if (code == "9") return RawStage::kUnknown;
  return std::nullopt;
}

std::vector<LabeledEpoch> segment_and_label(std::span<const double> samples, int sampling_rate_hz,
                                            std::span<const RawAnnotation> annotations,
                                            const std::string& subject_id,
                                            const SegmentOptions& options) {
  if (sampling_rate_hz <= 0) throw ShapeError("sampling rate must be positive");
  const std::size_t n = samples_per_epoch(sampling_rate_hz);
  const std::size_t signal_epochs = samples.size() / n;

  // Per-epoch raw labels; unannotated epochs stay unknown.
  std::vector<RawStage> labels;
  std::size_t scored_extent = 0;
  for (const RawAnnotation& a : annotations) {
    if (!on_grid(a.onset_s) || !on_grid(a.duration_s) || a.onset_s < 0.0) {
      throw AlignmentError("annotation at " + std::to_string(a.onset_s) + " s (" +
                           std::to_string(a.duration_s) + " s) is off the 30 s grid");
    }
    const auto first = static_cast<std::size_t>(std::llround(a.onset_s / kEpochSeconds));
    const auto count = static_cast<std::size_t>(std::llround(a.duration_s / kEpochSeconds));
    if (labels.size() < first + count) labels.resize(first + count, RawStage::kUnknown);
    std::fill(labels.begin() + static_cast<std::ptrdiff_t>(first),
              labels.begin() + static_cast<std::ptrdiff_t>(first + count), a.stage);
    if (a.stage != RawStage::kUnknown && count > 0) scored_extent = std::max(scored_extent, first + count);
  }
  const std::size_t annotated_extent = labels.size();
  if (scored_extent > signal_epochs + 1) {
    throw AlignmentError("scored annotations cover " + std::to_string(scored_extent) +
                         " epochs but the signal holds " + std::to_string(signal_epochs));
  }
  if (signal_epochs > annotated_extent + 1) {
    throw AlignmentError("signal holds " + std::to_string(signal_epochs) +
                         " epochs but annotations cover only " + std::to_string(annotated_extent));
  }
  labels.resize(signal_epochs, RawStage::kUnknown);

  std::size_t keep_begin = 0;
  std::size_t keep_end = signal_epochs;
  if (options.wake_edge_minutes) {
    const auto edge = static_cast<std::size_t>(*options.wake_edge_minutes) * 60 / kEpochSeconds;
    std::optional<std::size_t> first_sleep;
    std::size_t last_sleep = 0;
    for (std::size_t i = 0; i < signal_epochs; ++i) {
      auto h = harmonize(labels[i]);
      if (h && *h != SleepStage::kW) {
        if (!first_sleep) first_sleep = i;
        last_sleep = i;
      }
    }
    if (first_sleep) {
      keep_begin = *first_sleep > edge ? *first_sleep - edge : 0;
      keep_end = std::min(signal_epochs, last_sleep + edge + 1);
    }
  }

  std::vector<LabeledEpoch> out;
  for (std::size_t i = keep_begin; i < keep_end; ++i) {
    const auto stage = harmonize(labels[i]);
    if (!stage) continue;
    LabeledEpoch le;
    le.stage = *stage;
    le.epoch.sampling_rate_hz = sampling_rate_hz;
    le.epoch.subject_id = subject_id;
    le.epoch.index = static_cast<std::int64_t>(i);
    le.epoch.samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) le.epoch.samples.push_back(static_cast<float>(samples[i * n + k]));
    out.push_back(std::move(le));
  }
  return out;
}

std::vector<Epoch> segment_unlabeled(std::span<const double> samples, int sampling_rate_hz,
                                     const std::string& subject_id) {
  if (sampling_rate_hz <= 0) throw ShapeError("sampling rate must be positive");
  const std::size_t n = samples_per_epoch(sampling_rate_hz);
  std::vector<Epoch> out;
  for (std::size_t i = 0; (i + 1) * n <= samples.size(); ++i) {
    Epoch e;
    e.sampling_rate_hz = sampling_rate_hz;
    e.subject_id = subject_id;
    e.index = static_cast<std::int64_t>(i);
    for (std::size_t k = 0; k < n; ++k) e.samples.push_back(static_cast<float>(samples[i * n + k]));
    out.push_back(std::move(e));
  }
  return out;
}

std::size_t expected_window_count(std::size_t n, std::size_t length, std::size_t stride) {
  if (n < length) return 0;
  return (n - length) / stride + 1;
}

SequenceBuild build_sequences(const EpochTable& table, std::size_t length, std::size_t stride) {
  if (length < 1 || stride < 1) throw ConfigError("sequence length and stride must be at least 1");
  SequenceBuild out;
  std::size_t run_begin = 0;
  const std::size_t rows = table.size();
  for (std::size_t row = 1; row <= rows; ++row) {
    const bool breaks = row == rows || table.epoch_index(row) != table.epoch_index(row - 1) + 1;
    if (!breaks) continue;
    const std::size_t run = row - run_begin;
    const std::size_t windows = expected_window_count(run, length, stride);
    for (std::size_t w = 0; w < windows; ++w) {
      EpochSequence seq;
      seq.subject_id = table.subject_id();
      seq.first_row = run_begin + w * stride;
      seq.length = length;
      std::vector<SleepStage> stages;
      bool all_labeled = true;
      for (std::size_t r = seq.first_row; r < seq.first_row + length; ++r) {
        if (!table.labeled(r)) {
          all_labeled = false;
          break;
        }
        stages.push_back(table.stage(r));
      }
      if (all_labeled) seq.stages = std::move(stages);
      out.sequences.push_back(std::move(seq));
    }
    run_begin = row;
  }
  if (out.sequences.empty()) out.warnings.push_back({table.subject_id(), rows});
  return out;
}

}  // namespace hypnos::ingest
