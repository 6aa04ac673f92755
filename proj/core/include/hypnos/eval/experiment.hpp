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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypnos/config/run_config.hpp"
#include "hypnos/eval/metrics.hpp"
#include "hypnos/ingest/manifest.hpp"
#include "hypnos/sequence/classifier.hpp"
#include "hypnos/train/pipeline.hpp"

namespace hypnos::eval {

// Model and training settings drawn from a run configuration.
features::FeatureNetConfig feature_config_for(const config::RunConfig& run, int sampling_rate_hz);
sequence::ClassifierConfig classifier_config_for(const config::RunConfig& run);
train::TrainConfig train_config_for(const config::RunConfig& run, const std::filesystem::path& log_path = {});
train::SequenceOptions sequence_options_for(const config::RunConfig& run);

struct SplitTables {
  std::vector<EpochTable> train;
  std::vector<EpochTable> validation;
  std::vector<EpochTable> test;
  std::vector<EpochTable> unlabeled;
};

struct TrainedModels {
  train::FeatureStageResult features;
  train::ClassifierStageResult classifier;
};

// Both stages. With a non-empty dir, writes dir/feature and dir/classifier
// checkpoints, dir/train_log.jsonl, and resumable state under dir/state.
TrainedModels train_models(const SplitTables& split, const config::RunConfig& run,
                           const std::filesystem::path& dir = {});

struct SequencePrediction {
  std::string subject_id;
  std::vector<std::int64_t> epoch_indices;
  sequence::DecodedSequence decoded;
  std::optional<std::vector<SleepStage>> truth;
};

struct Evaluation {
  ConfusionMatrix confusion;
  std::map<std::string, ConfusionMatrix> per_subject;
  std::vector<SequencePrediction> predictions;
};

// Decodes every non-overlapping full window of each table.
Evaluation evaluate_tables(features::FeatureNet& features, sequence::SequenceClassifier& classifier,
                           const std::vector<EpochTable>& tables, std::size_t sequence_length);

struct FoldReport {
  std::size_t fold = 0;
  std::vector<std::string> train_subjects;
  std::vector<std::string> validation_subjects;
  std::vector<std::string> test_subjects;
  ConfusionMatrix confusion;
  Metrics metrics;
  std::map<std::string, Metrics> per_subject;
  nlohmann::json feature_history;
  nlohmann::json classifier_history;
};

struct Aggregate {
  MeanStd accuracy;
  MeanStd macro_f1;
  MeanStd kappa;
  std::array<MeanStd, kNumStages> per_class_f1{};
};

Aggregate aggregate(const std::vector<FoldReport>& folds);

struct CrossValidation {
  std::vector<FoldReport> folds;
  Aggregate aggregate;
};

struct CrossValidationOptions {
  std::vector<EpochTable> unlabeled;
  std::filesystem::path out_dir;  // per-fold checkpoints and logs when set
  std::function<void(const std::string&)> progress;
};

// Trains and evaluates each fold. A failing fold aborts the run with an
// error of the same category naming the fold.
CrossValidation cross_validate(const ingest::DatasetManifest& manifest, const config::RunConfig& run,
                               const CrossValidationOptions& options = {});

struct WorstCaseEntry {
  std::string subject_id;
  std::size_t fold = 0;
  double emd = 0.0;
  Metrics metrics;
};

// Every test subject scored by mean EMD to its fold's training subjects,
// sorted by decreasing distance with ties broken by subject id.
std::vector<WorstCaseEntry> worst_case_report(const ingest::DatasetManifest& manifest,
                                              const std::vector<FoldReport>& folds,
                                              std::size_t max_points = 100000);

}  // namespace hypnos::eval
