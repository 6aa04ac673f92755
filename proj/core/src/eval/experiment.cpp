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

#include "hypnos/eval/experiment.hpp"

#include <algorithm>
#include <map>

#include "hypnos/error.hpp"
#include "hypnos/eval/emd.hpp"
#include "hypnos/ingest/dataset.hpp"
#include "hypnos/ingest/segment.hpp"

namespace hypnos::eval {

namespace fs = std::filesystem;

features::FeatureNetConfig feature_config_for(const config::RunConfig& run, int sampling_rate_hz) {
  auto c = run.feature_net;
  c.sampling_rate_hz = sampling_rate_hz;
  return c;
}

sequence::ClassifierConfig classifier_config_for(const config::RunConfig& run) {
  auto c = run.classifier;
  c.input_dim = run.feature_net.latent_dim_sleep;
  return c;
}

train::TrainConfig train_config_for(const config::RunConfig& run, const fs::path& log_path) {
  auto c = run.train;
  c.seed = run.seed;
  c.log_path = log_path.string();
  return c;
}

train::SequenceOptions sequence_options_for(const config::RunConfig& run) {
  return {run.data.sequence_length, run.data.effective_stride()};
}

TrainedModels train_models(const SplitTables& split, const config::RunConfig& run, const fs::path& dir) {
  if (split.train.empty()) throw EmptyDatasetError("no training subjects");
  fs::path log;
  if (!dir.empty()) {
    fs::create_directories(dir);
    log = dir / "train_log.jsonl";
    fs::remove(log);
  }
  const auto train_config = train_config_for(run, log);
  TrainedModels m;
  m.features = train::train_feature_stage({split.train, split.unlabeled, split.validation},
                                          feature_config_for(run, split.train.front().sampling_rate_hz()),
                                          train_config, dir.empty() ? fs::path() : dir / "state" / "feature");
  if (!dir.empty()) train::save_checkpoint(dir / "feature", m.features.checkpoint);
  m.classifier = train::train_classifier_stage(m.features.checkpoint, split.train, split.validation,
                                               classifier_config_for(run), train_config, sequence_options_for(run),
                                               dir.empty() ? fs::path() : dir / "state" / "classifier");
  if (!dir.empty()) train::save_checkpoint(dir / "classifier", m.classifier.checkpoint);
  return m;
}

Evaluation evaluate_tables(features::FeatureNet& features, sequence::SequenceClassifier& classifier,
                           const std::vector<EpochTable>& tables, std::size_t sequence_length) {
  Evaluation out;
  for (const auto& table : tables) {
    const auto build = ingest::build_sequences(table, sequence_length, sequence_length);
    const auto n = static_cast<std::int64_t>(table.epoch_length());
    auto& subject_confusion = out.per_subject[table.subject_id()];
    for (const auto& s : build.sequences) {
      const auto x = torch::from_blob(const_cast<float*>(table.samples(s.first_row).data()),
                                      {static_cast<std::int64_t>(s.length), n}, torch::kFloat32);
      SequencePrediction p;
      p.subject_id = table.subject_id();
      for (std::size_t r = s.first_row; r < s.first_row + s.length; ++r) p.epoch_indices.push_back(table.epoch_index(r));
      p.decoded = train::classify_sequence(features, classifier, x);
      p.truth = s.stages;
      if (s.stages) subject_confusion.add(*s.stages, p.decoded.stages);
      out.predictions.push_back(std::move(p));
    }
    out.confusion += subject_confusion;
  }
  return out;
}

Aggregate aggregate(const std::vector<FoldReport>& folds) {
  auto collect = [&](auto get) {
    std::vector<double> v;
    for (const auto& f : folds) v.push_back(get(f.metrics));
    return mean_std(v);
  };
  Aggregate a;
  a.accuracy = collect([](const Metrics& m) { return m.accuracy; });
  a.macro_f1 = collect([](const Metrics& m) { return m.macro_f1; });
  a.kappa = collect([](const Metrics& m) { return m.kappa; });
  for (int c = 0; c < kNumStages; ++c) {
    a.per_class_f1[c] = collect([c](const Metrics& m) { return m.per_class_f1[c]; });
  }
  return a;
}

CrossValidation cross_validate(const ingest::DatasetManifest& manifest, const config::RunConfig& run,
                               const CrossValidationOptions& options) {
  auto splits = ingest::manifest_folds(manifest, run.data.folds, run.data.val_fraction, run.seed);
  if (run.data.max_folds > 0 && splits.size() > run.data.max_folds) splits.resize(run.data.max_folds);

  std::map<std::string, EpochTable> cache;
  auto tables = [&](const std::vector<std::string>& ids) {
    std::vector<EpochTable> out;
    for (const auto& id : ids) {
      auto it = cache.find(id);
      if (it == cache.end()) it = cache.emplace(id, manifest.load_subject(id)).first;
      out.push_back(it->second);
    }
    return out;
  };

  CrossValidation cv;
  for (const auto& split : splits) {
    const std::string tag = "fold " + std::to_string(split.fold);
    if (options.progress) options.progress(tag + ": training on " + std::to_string(split.train.size()) + " subjects");
    try {
      SplitTables st{tables(split.train), tables(split.validation), tables(split.test), options.unlabeled};
      const fs::path dir = options.out_dir.empty() ? fs::path() : options.out_dir / ("fold_" + std::to_string(split.fold));
      auto models = train_models(st, run, dir);
      auto evaluation = evaluate_tables(models.features.net, models.classifier.classifier, st.test,
                                        run.data.sequence_length);
      FoldReport report;
      report.fold = split.fold;
      report.train_subjects = split.train;
      report.validation_subjects = split.validation;
      report.test_subjects = split.test;
      report.confusion = evaluation.confusion;
      report.metrics = compute_metrics(evaluation.confusion);
      for (const auto& [id, confusion] : evaluation.per_subject) {
        if (confusion.total() > 0) report.per_subject[id] = compute_metrics(confusion);
      }
      report.feature_history = models.features.history;
      report.classifier_history = models.classifier.history;
      if (options.progress) {
        options.progress(tag + ": accuracy " + std::to_string(report.metrics.accuracy));
      }
      cv.folds.push_back(std::move(report));
    } catch (const Error& e) {
      throw Error(e.category(), tag + ": " + e.what());
    }
  }
  cv.aggregate = aggregate(cv.folds);
  return cv;
}

std::vector<WorstCaseEntry> worst_case_report(const ingest::DatasetManifest& manifest,
                                              const std::vector<FoldReport>& folds, std::size_t max_points) {
  std::map<std::string, std::vector<float>> samples;
  auto subject_samples = [&](const std::string& id) -> const std::vector<float>& {
    auto it = samples.find(id);
    if (it == samples.end()) {
      const auto table = manifest.load_subject(id);
      it = samples.emplace(id, subsample(table.all_samples(), max_points)).first;
    }
    return it->second;
  };
  std::vector<WorstCaseEntry> out;
  for (const auto& fold : folds) {
    std::vector<std::vector<float>> train;
    for (const auto& id : fold.train_subjects) train.push_back(subject_samples(id));
    std::vector<std::span<const float>> train_spans(train.begin(), train.end());
    for (const auto& id : fold.test_subjects) {
      WorstCaseEntry e;
      e.subject_id = id;
      e.fold = fold.fold;
      e.emd = emd_subject_distance(subject_samples(id), train_spans, max_points);
      const auto it = fold.per_subject.find(id);
      if (it != fold.per_subject.end()) e.metrics = it->second;
      out.push_back(std::move(e));
    }
  }
  std::sort(out.begin(), out.end(), [](const WorstCaseEntry& a, const WorstCaseEntry& b) {
    if (a.emd != b.emd) return a.emd > b.emd;
    return a.subject_id < b.subject_id;
  });
  return out;
}

}  // namespace hypnos::eval
