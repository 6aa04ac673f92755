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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hypnos/config/run_config.hpp"
#include "hypnos/error.hpp"
#include "hypnos/eval/experiment.hpp"
#include "hypnos/eval/report.hpp"
#include "hypnos/ingest/canonical.hpp"
#include "hypnos/ingest/dataset.hpp"
#include "hypnos/ingest/edf.hpp"
#include "hypnos/ingest/segment.hpp"
#include "hypnos/ingest/synthetic.hpp"
#include "hypnos/random.hpp"
#include "hypnos/train/pipeline.hpp"

namespace hypnos::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string unlabeled_manifest;
  std::string variant;
  std::vector<std::string> set;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Run configuration (JSON)")->required();
  cmd->add_option("--seed", f.seed, "Root seed; overrides the file and environment");
  cmd->add_option("--out-dir", f.out_dir, "Output directory; overrides output_dir");
  cmd->add_option("--unlabeled-manifest", f.unlabeled_manifest, "Manifest of unlabeled recordings");
  cmd->add_option("--variant", f.variant, "full, no_crf, no_vae_losses, no_scl, no_augmentation, logistic, logistic_crf");
  cmd->add_option("--set", f.set, "Override a config key, e.g. train.learning_rate=0.01");
}

config::RunConfig load_config(const CommonFlags& f, char** envp) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) overrides.emplace_back("seed", std::to_string(*f.seed));
  // Paths given on the command line are taken relative to the working
  // directory, so make them absolute before they meet the config's base.
  if (!f.out_dir.empty()) overrides.emplace_back("output_dir", json(fs::absolute(f.out_dir).string()).dump());
  if (!f.unlabeled_manifest.empty()) {
    overrides.emplace_back("data.unlabeled_manifest", json(fs::absolute(f.unlabeled_manifest).string()).dump());
  }
  if (!f.variant.empty()) overrides.emplace_back("variant", json(f.variant).dump());
  return config::load_run_config(f.config, envp, overrides);
}

std::vector<EpochTable> load_tables(const ingest::DatasetManifest& m, const std::vector<std::string>& ids) {
  std::vector<EpochTable> out;
  for (const auto& id : ids) out.push_back(m.load_subject(id));
  return out;
}

std::vector<EpochTable> load_unlabeled(const config::RunConfig& run) {
  if (run.data.unlabeled_manifest.empty()) return {};
  const auto m = ingest::DatasetManifest::load(run.data.unlabeled_manifest);
  std::vector<EpochTable> out;
  for (const auto& id : m.subject_ids()) out.push_back(m.load_subject(id).without_labels());
  return out;
}

void write_lines(const fs::path& path, const std::vector<json>& records) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  for (const auto& r : records) out << r.dump() << "\n";
  if (!out) throw ConfigError("cannot write " + path.string());
}

// --- ingest ---------------------------------------------------------------

struct IngestFlags {
  std::string raw_dir;
  std::string out_dir;
  std::string manifest;
  std::string channel;
  std::string kind = "sleepedf";
  bool unlabeled = false;
  std::optional<int> wake_edge_minutes;
};

int cmd_ingest(const IngestFlags& f, std::ostream& out, std::ostream& err) {
  ingest::IngestOptions options;
  options.kind = ingest::parse_dataset_kind(f.kind);
  options.channel = f.channel;
  options.strip_labels = f.unlabeled;
  options.segment.wake_edge_minutes = f.wake_edge_minutes;
  const fs::path manifest = f.manifest.empty() ? fs::path(f.out_dir) / "manifest.json" : fs::path(f.manifest);
  const auto result = ingest::ingest_directory(f.raw_dir, f.out_dir, manifest, options);
  for (const auto& failure : result.failures) err << "failed: " << failure.path.string() << ": " << failure.message << "\n";
  out << result.manifest.subjects.size() << " subjects written to " << manifest.string() << "\n";
  out << eval::format_stats_table(f.kind, result.stats);
  return 0;
}

// --- synth ----------------------------------------------------------------

int cmd_synth(const ingest::SyntheticConfig& config, const std::string& out_dir, std::ostream& out) {
  const auto m = ingest::write_synthetic_dataset(out_dir, config);
  out << m.subjects.size() << " synthetic subjects written to " << (fs::path(out_dir) / "manifest.json").string()
      << "\n";
  return 0;
}

// --- stats ----------------------------------------------------------------

int cmd_stats(const std::string& manifest_path, std::ostream& out) {
  const auto m = ingest::DatasetManifest::load(manifest_path);
  std::vector<EpochTable> tables;
  for (const auto& id : m.subject_ids()) {
    tables.push_back(m.load_subject(id));
    const auto s = ingest::dataset_stats(std::vector<EpochTable>{tables.back()});
    out << json{{"record", "subject_stats"},  {"subject_id", id},  {"epochs", s.total_epochs},
                {"mean", s.mean},             {"std", s.std},      {"min", s.min},
                {"max", s.max},               {"stage_counts", s.stage_counts}}
               .dump()
        << "\n";
  }
  out << eval::format_stats_table(m.dataset_kind.empty() ? "dataset" : m.dataset_kind, ingest::dataset_stats(tables));
  return 0;
}

// --- train ----------------------------------------------------------------

int cmd_train(const CommonFlags& f, const std::string& stage, char** envp, std::ostream& out) {
  if (stage != "features" && stage != "classifier" && stage != "both") {
    throw ConfigError("--stage must be features, classifier or both");
  }
  const auto run = load_config(f, envp);
  if (run.output_dir.empty()) throw ConfigError("output_dir must be set");
  const auto manifest = ingest::DatasetManifest::load(run.data.manifest);
  auto ids = manifest.subject_ids();
  auto rng = make_rng(run.seed, SeedPurpose::kSplit, 0xFFFF);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(run.data.val_fraction * static_cast<double>(ids.size())));
  if (n_val >= ids.size()) throw ConfigError("data.val_fraction leaves no training subjects");
  std::vector<std::string> val(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::string> train(ids.begin() + static_cast<std::ptrdiff_t>(n_val), ids.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());

  const fs::path dir = run.output_dir;
  fs::create_directories(dir);
  write_lines(dir / "split.jsonl", {json{{"train", train}, {"validation", val}}});
  {
    std::ofstream cfg(dir / "run_config.json", std::ios::trunc);
    cfg << config::to_json(run).dump(2) << "\n";
  }
  const auto log = dir / "train_log.jsonl";
  const auto train_config = eval::train_config_for(run, log);
  const auto train_tables = load_tables(manifest, train);
  const auto val_tables = load_tables(manifest, val);

  train::Checkpoint feature_ckpt;
  if (stage == "features" || stage == "both") {
    fs::remove(log);
    auto result = train::train_feature_stage({train_tables, load_unlabeled(run), val_tables},
                                             eval::feature_config_for(run, manifest.sampling_rate_hz), train_config);
    train::save_checkpoint(dir / "feature", result.checkpoint);
    feature_ckpt = result.checkpoint;
    out << "feature checkpoint " << feature_ckpt.id << " (best epoch " << result.best_epoch << ") -> "
        << (dir / "feature").string() << "\n";
  } else {
    feature_ckpt = train::load_checkpoint(dir / "feature");
  }
  if (stage == "classifier" || stage == "both") {
    auto result = train::train_classifier_stage(feature_ckpt, train_tables, val_tables,
                                                eval::classifier_config_for(run), train_config,
                                                eval::sequence_options_for(run));
    train::save_checkpoint(dir / "classifier", result.checkpoint);
    out << "classifier checkpoint " << result.checkpoint.id << " (best epoch " << result.best_epoch << ") -> "
        << (dir / "classifier").string() << "\n";
  }
  return 0;
}

// --- evaluate -------------------------------------------------------------

int cmd_evaluate(const CommonFlags& f, char** envp, std::ostream& out, std::ostream& err) {
  const auto run = load_config(f, envp);
  if (run.output_dir.empty()) throw ConfigError("output_dir must be set");
  const auto manifest = ingest::DatasetManifest::load(run.data.manifest);
  const fs::path dir = run.output_dir;
  fs::create_directories(dir);
  eval::CrossValidationOptions options;
  options.unlabeled = load_unlabeled(run);
  options.out_dir = dir;
  options.progress = [&err](const std::string& line) { err << line << "\n"; };
  const auto cv = eval::cross_validate(manifest, run, options);
  const auto worst = eval::worst_case_report(manifest, cv.folds, run.data.emd_max_samples);

  std::vector<json> records;
  for (const auto& fold : cv.folds) records.push_back(eval::fold_json(fold));
  records.push_back(eval::aggregate_json(cv.aggregate));
  write_lines(dir / "folds.jsonl", records);
  std::vector<json> worst_records;
  for (const auto& e : worst) worst_records.push_back(eval::worst_case_json(e));
  write_lines(dir / "worst_case.jsonl", worst_records);

  const std::string report = eval::format_fold_table(cv.folds, cv.aggregate) + "\n" + eval::format_worst_case(worst);
  std::ofstream(dir / "report.txt", std::ios::trunc) << report;
  out << report;
  return 0;
}

// --- predict --------------------------------------------------------------

struct PredictFlags {
  std::string checkpoint;
  std::string recording;
  std::string channel;
  std::string out;
  std::optional<double> threshold;
  std::string plot_dir;
  std::optional<std::size_t> max_plots;
};

EpochTable load_recording_table(const PredictFlags& f) {
  const fs::path path = f.recording;
  if (path.extension() == ".edf") {
    if (f.channel.empty()) throw ConfigError("--channel is required for EDF recordings");
    const auto rec = ingest::load_recording(path, f.channel);
    EpochTable table(rec.subject_id, rec.sampling_rate_hz, f.channel);
    for (const auto& e : ingest::segment_unlabeled(rec.samples, rec.sampling_rate_hz, rec.subject_id)) {
      table.append(e.samples, std::nullopt, e.index);
    }
    return table;
  }
  return ingest::read_canonical(path);
}

int cmd_predict(const PredictFlags& f, std::ostream& out) {
  const fs::path ckpt_dir = f.checkpoint;
  auto model = train::load_model(train::load_checkpoint(ckpt_dir / "feature"),
                                 train::load_checkpoint(ckpt_dir / "classifier"));
  const auto table = load_recording_table(f);
  if (table.sampling_rate_hz() != model.sampling_rate_hz) {
    throw TransferError("recording is sampled at " + std::to_string(table.sampling_rate_hz()) +
                        " Hz but the model expects " + std::to_string(model.sampling_rate_hz) +
                        " Hz; fine-tune the model on data at the new rate first");
  }
  const double threshold = f.threshold.value_or(1.0);

  // Every epoch is predicted: contiguous runs are cut into windows of the
  // trained length, the last window of a run keeping whatever remains.
  const std::size_t length = model.sequences.length;
  const auto n = static_cast<std::int64_t>(table.epoch_length());
  std::vector<json> epoch_lines;
  std::vector<json> sequence_lines;
  std::vector<eval::SequencePrediction> predictions;
  std::size_t run_begin = 0;
  for (std::size_t row = 1; row <= table.size(); ++row) {
    if (row < table.size() && table.epoch_index(row) == table.epoch_index(row - 1) + 1) continue;
    for (std::size_t start = run_begin; start < row; start += length) {
      const std::size_t len = std::min(length, row - start);
      const auto x = torch::from_blob(const_cast<float*>(table.samples(start).data()),
                                      {static_cast<std::int64_t>(len), n}, torch::kFloat32);
      eval::SequencePrediction p;
      p.subject_id = table.subject_id();
      std::vector<SleepStage> truth;
      for (std::size_t r = start; r < start + len; ++r) {
        p.epoch_indices.push_back(table.epoch_index(r));
        if (table.labeled(r)) truth.push_back(table.stage(r));
      }
      if (truth.size() == len) p.truth = truth;
      p.decoded = train::classify_sequence(model.features, model.classifier, x);
      for (auto& line : eval::epoch_records(p, threshold)) epoch_lines.push_back(std::move(line));
      sequence_lines.push_back(eval::prediction_json(p));
      predictions.push_back(std::move(p));
    }
    run_begin = row;
  }

  const fs::path out_path = f.out;
  write_lines(out_path, epoch_lines);
  fs::path sequences_path = out_path;
  sequences_path.replace_extension(".sequences.jsonl");
  write_lines(sequences_path, sequence_lines);

  std::size_t flagged = 0;
  for (const auto& line : epoch_lines) flagged += line.at("flagged").get<bool>() ? 1 : 0;
  if (!f.plot_dir.empty()) {
    fs::create_directories(f.plot_dir);
    const std::size_t limit = f.max_plots.value_or(predictions.size());
    for (std::size_t i = 0; i < predictions.size() && i < limit; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "sequence_%04zu.svg", i);
      std::ofstream(fs::path(f.plot_dir) / name, std::ios::trunc) << eval::uncertainty_plot_svg(predictions[i], threshold);
    }
  }
  out << epoch_lines.size() << " epochs predicted, " << flagged << " flagged above uncertainty " << threshold
      << " -> " << out_path.string() << "\n";
  return 0;
}

}  // namespace

int run(int argc, char** argv, char** envp, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sleep staging: ingestion, two-stage training, evaluation and prediction", "hypnos"};
  app.require_subcommand(1);

  IngestFlags ingest_flags;
  auto* ingest = app.add_subcommand("ingest", "Convert raw EDF recordings to canonical per-subject files");
  ingest->add_option("--raw-dir", ingest_flags.raw_dir, "Directory of raw recordings")->required();
  ingest->add_option("--out", ingest_flags.out_dir, "Directory for canonical files")->required();
  ingest->add_option("--manifest", ingest_flags.manifest, "Manifest path (default <out>/manifest.json)");
  ingest->add_option("--channel", ingest_flags.channel, "Signal label, e.g. \"EEG Fpz-Cz\"")->required();
  ingest->add_option("--kind", ingest_flags.kind, "sleepedf or shhs");
  ingest->add_flag("--unlabeled", ingest_flags.unlabeled, "Drop stage labels");
  ingest->add_option("--wake-edge-minutes", ingest_flags.wake_edge_minutes,
                     "Keep only this much wake before the first and after the last sleep epoch");

  ingest::SyntheticConfig synth_config;
  std::string synth_out;
  bool synth_unlabeled = false;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with independent subject and stage factors");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--subjects", synth_config.subjects, "Number of subjects");
  synth->add_option("--epochs", synth_config.epochs_per_subject, "Epochs per subject");
  synth->add_option("--rate", synth_config.sampling_rate_hz, "Sampling rate in Hz");
  synth->add_option("--seed", synth_config.seed, "Generator seed");
  synth->add_option("--prefix", synth_config.subject_prefix, "Subject id prefix");
  synth->add_flag("--unlabeled", synth_unlabeled, "Omit stage labels");

  std::string stats_manifest;
  auto* stats = app.add_subcommand("stats", "Summarize a canonical dataset");
  stats->add_option("--manifest", stats_manifest, "Dataset manifest")->required();

  CommonFlags train_flags;
  std::string stage = "both";
  auto* train = app.add_subcommand("train", "Train the feature network, the classifier, or both");
  add_common(train, train_flags);
  train->add_option("--stage", stage, "features, classifier or both");

  CommonFlags eval_flags;
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate and report per-fold and aggregate scores");
  add_common(evaluate, eval_flags);

  PredictFlags predict_flags;
  auto* predict = app.add_subcommand("predict", "Stage a recording with uncertainty scores");
  predict->add_option("--checkpoint", predict_flags.checkpoint, "Directory holding feature/ and classifier/")->required();
  predict->add_option("--recording", predict_flags.recording, "Canonical .hyc file or EDF recording")->required();
  predict->add_option("--channel", predict_flags.channel, "Signal label for EDF recordings");
  predict->add_option("--out", predict_flags.out, "Per-epoch JSONL output")->required();
  predict->add_option("--threshold", predict_flags.threshold, "Flag epochs whose uncertainty exceeds this (default 1.0)");
  predict->add_option("--plot", predict_flags.plot_dir, "Write one SVG case-study plot per sequence here");
  predict->add_option("--max-plots", predict_flags.max_plots, "Limit the number of plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code_for(ErrorCategory::kConfig);
  }

  try {
    if (*ingest) return cmd_ingest(ingest_flags, out, err);
    if (*synth) {
      synth_config.labeled = !synth_unlabeled;
      return cmd_synth(synth_config, synth_out, out);
    }
    if (*stats) return cmd_stats(stats_manifest, out);
    if (*train) return cmd_train(train_flags, stage, envp, out);
    if (*evaluate) return cmd_evaluate(eval_flags, envp, out, err);
    if (*predict) return cmd_predict(predict_flags, out);
  } catch (const Error& e) {
    err << "error (" << category_name(e.category()) << "): " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    err << "error (internal): " << e.what() << "\n";
    return exit_code_for(ErrorCategory::kInternal);
  }
  return 0;
}

}  // namespace hypnos::cli
