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

#include <string>
#include <vector>

#include <json.hpp>

#include "hypnos/eval/experiment.hpp"
#include "hypnos/ingest/manifest.hpp"

namespace hypnos::eval {

nlohmann::json metrics_json(const Metrics& metrics);
nlohmann::json fold_json(const FoldReport& fold);
nlohmann::json aggregate_json(const Aggregate& aggregate);

// Fixed-width table: one row per fold, then the mean ± std row.
std::string format_fold_table(const std::vector<FoldReport>& folds, const Aggregate& aggregate);
std::string format_stats_table(const std::string& name, const ingest::DatasetStats& stats);
std::string format_worst_case(const std::vector<WorstCaseEntry>& entries);
nlohmann::json worst_case_json(const WorstCaseEntry& entry);

// One record per sequence.
nlohmann::json prediction_json(const SequencePrediction& prediction);
// One record per epoch; flagged when the uncertainty exceeds threshold.
std::vector<nlohmann::json> epoch_records(const SequencePrediction& prediction, double threshold);

// Three stacked tracks: reference stages (when known), predicted stages, and
// per-epoch uncertainty bars with the flag threshold drawn across them.
std::string uncertainty_plot_svg(const SequencePrediction& prediction, double threshold);

}  // namespace hypnos::eval
