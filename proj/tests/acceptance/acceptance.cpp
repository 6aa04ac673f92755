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

// Acceptance checks for the full pipeline. Prints one PASS / FAIL / SKIP
// line per criterion and exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "commands.hpp"
#include "gradcheck.hpp"
#include "hypnos/config/run_config.hpp"
#include "hypnos/error.hpp"
#include "hypnos/eval/emd.hpp"
#include "hypnos/eval/experiment.hpp"
#include "hypnos/eval/metrics.hpp"
#include "hypnos/eval/probe.hpp"
#include "hypnos/features/losses.hpp"
#include "hypnos/ingest/dataset.hpp"
#include "hypnos/ingest/synthetic.hpp"
#include "hypnos/random.hpp"
#include "hypnos/sequence/classifier.hpp"
#include "hypnos/sequence/crf.hpp"
#include "hypnos/train/pipeline.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hypnos;
using Clock = std::chrono::steady_clock;

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict = Verdict::kFail;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Verdict::kPass : Verdict::kFail, std::move(detail)}; }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

sequence::EmissionMatrix random_emissions(std::size_t t, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  sequence::EmissionMatrix e(t);
  for (auto& row : e) {
    for (auto& v : row) v = normal(rng);
  }
  return e;
}

sequence::CrfParams random_crf(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  sequence::CrfParams p;
  for (auto& v : p.start) v = normal(rng);
  for (auto& row : p.transition) {
    for (auto& v : row) v = normal(rng);
  }
  return p;
}

// --- 1 ----------------------------------------------------------------------

Outcome crf_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  int mismatched_paths = 0;
  double worst_partition = 0.0;
  int cases = 0;
  for (std::size_t t = 1; t <= 6; ++t) {
    for (int draw = 0; draw < 100; ++draw) {
      const auto emissions = random_emissions(t, rng, 2.0);
      const auto params = random_crf(rng, 2.0);
      const auto truth = testing::enumerate_crf(emissions, params);
      const auto decoded = sequence::viterbi_decode(emissions, params);
      if (decoded.stages != truth.argmax) ++mismatched_paths;
      worst_partition =
          std::max(worst_partition, std::abs(sequence::crf_log_partition(emissions, params) - truth.log_partition));
      ++cases;
    }
  }
  const double secs = seconds_since(t0);
  return pass_if(mismatched_paths == 0 && worst_partition <= 1e-6 && secs < 60.0,
                 fmt("%d cases, %d argmax mismatches, max |logZ error| %.2e, %.1f s", cases, mismatched_paths,
                     worst_partition, secs));
}

// --- 2 ----------------------------------------------------------------------

features::FeatureNetConfig tiny_feature_config() {
  features::FeatureNetConfig c;
  c.sampling_rate_hz = 1;
  c.num_subjects = 2;
  c.latent_dim_subject = 2;
  c.latent_dim_sleep = 1;
  c.encoder.base_width = 1;
  c.encoder.blocks = {1};
  c.encoder.expansion = 1;
  c.decoder_hidden = 2;
  c.decoder_channels = 4;
  c.prior_hidden = 2;
  c.projection_hidden = 4;
  c.projection_dim = 2;
  return c;
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  torch::manual_seed(202);
  std::vector<std::string> lines;
  double worst = 0.0;
  std::int64_t largest_net = 0;
  auto record = [&](const std::string& name, const testing::GradCheckResult& r) {
    worst = std::max(worst, r.relative_error);
    lines.push_back(fmt("%s %.1e (|g| %.1e vs %.1e)", name.c_str(), r.relative_error, r.analytic_norm, r.numeric_norm));
  };

  features::FeatureNet net(tiny_feature_config());
  net->to(torch::kFloat64);
  net->train();
  largest_net = std::max(largest_net, testing::parameter_count(*net));
  const auto opts = torch::TensorOptions().dtype(torch::kFloat64);
  features::ViewBatch batch;
  batch.x = torch::randn({6, 30}, opts);
  batch.subjects = torch::tensor({0, 0, 1, 1, 0, 0}, torch::kInt64);
  batch.stages = torch::tensor({2, 2, 4, 4, 2, 2}, torch::kInt64);
  const features::FeatureLossWeights weights;
  auto fresh_generator = [] { return at::detail::createCPUGenerator(7); };

  record("labeled", testing::check_gradients(
                    [&] {
                      auto g = fresh_generator();
                      return features::feature_loss_labeled(net, batch, weights, g).total;
                    },
                    testing::parameter_list(*net)));
  record("unlabeled", testing::check_gradients(
                    [&] {
                      auto g = fresh_generator();
                      return features::feature_loss_unlabeled(net, batch, weights, g);
                    },
                    testing::parameter_list(*net)));

  sequence::ClassifierConfig cc;
  cc.input_dim = 2;
  cc.transformer.layers = 1;
  cc.transformer.heads = 2;
  cc.transformer.model_dim = 4;
  cc.transformer.feed_forward_dim = 4;
  cc.transformer.dropout = 0.0;
  sequence::SequenceClassifier classifier(cc);
  classifier->to(torch::kFloat64);
  classifier->train();
  largest_net = std::max(largest_net, testing::parameter_count(*classifier));
  const auto z = torch::randn({2, 4, 2}, opts);
  const auto stages = torch::randint(0, 5, {2, 4}, torch::kInt64);
  record("sequence", testing::check_gradients([&] { return classifier->loss(z, stages); },
                                              testing::parameter_list(*classifier)));

  // Component losses with respect to their direct inputs.
  auto leaf = [&](std::vector<std::int64_t> shape) { return torch::randn(shape, opts).requires_grad_(true); };
  {
    auto qm = leaf({3, 2}), qv = leaf({3, 2}), pm = leaf({3, 2}), pv = leaf({3, 2});
    record("kl", testing::check_gradients([&] { return features::gaussian_kl({qm, qv}, {pm, pv}).sum(); },
                                          {qm, qv, pm, pv}));
  }
  {
    auto logits = leaf({4, 5});
    const auto labels = torch::tensor({0, 3, 3, 1}, torch::kInt64);
    record("ce", testing::check_gradients([&] { return features::classification_loss(logits, labels); }, {logits}));
  }
  {
    auto raw = leaf({4, 3});
    record("cl", testing::check_gradients(
                     [&] { return features::contrastive_self(torch::nn::functional::normalize(raw), 0.5); }, {raw}));
    const auto labels = torch::tensor({1, 1, 2, 2}, torch::kInt64);
    record("scl", testing::check_gradients(
                      [&] {
                        return features::contrastive_supervised(torch::nn::functional::normalize(raw), labels, 0.5);
                      },
                      {raw}));
  }
  {
    auto zd = leaf({6, 2}), zy = leaf({6, 1});
    record("recon", testing::check_gradients([&] { return -torch::mse_loss(net->decode(zd, zy), batch.x); },
                                             {zd, zy}));
  }
  {
    sequence::CrfLayer crf;
    crf->to(torch::kFloat64);
    {
      torch::NoGradGuard guard;
      crf->start.normal_();
      crf->transition.normal_();
    }
    auto emissions = leaf({3, 5, 5});
    const auto labels = torch::randint(0, 5, {3, 5}, torch::kInt64);
    record("crf", testing::check_gradients([&] { return crf->nll(emissions, labels); },
                                           {emissions, crf->start, crf->transition}));
  }
  const double secs = seconds_since(t0);
  std::string joined;
  for (const auto& l : lines) joined += (joined.empty() ? "" : ", ") + l;
  return pass_if(worst <= 1e-3 && largest_net <= 500 && secs < 300.0,
                 fmt("relative errors: %s; largest network %lld parameters, %.1f s", joined.c_str(),
                     static_cast<long long>(largest_net), secs));
}

// --- 3 ----------------------------------------------------------------------

Outcome uncertainty_properties() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> length(1, 20);
  std::uniform_real_distribution<double> scale(0.01, 20.0);
  const double ln5 = std::log(5.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < 10000; ++i) {
    const double s = scale(rng);
    const auto emissions = random_emissions(length(rng), rng, s);
    const auto params = random_crf(rng, s);
    const auto decoded = sequence::viterbi_decode(emissions, params);
    for (double u : sequence::uncertainty_scores(decoded.stages, emissions, params)) {
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
  }
  const bool in_range = lo >= 0.0 && hi <= ln5;

  // Uniform potentials: every local distribution is flat.
  sequence::EmissionMatrix flat(8);
  for (auto& row : flat) row.fill(0.3);
  sequence::CrfParams flat_params;
  flat_params.start.fill(-1.0);
  for (auto& row : flat_params.transition) row.fill(0.7);
  double uniform_error = 0.0;
  const auto flat_path = sequence::viterbi_decode(flat, flat_params).stages;
  for (double u : sequence::uncertainty_scores(flat_path, flat, flat_params)) {
    uniform_error = std::max(uniform_error, std::abs(u - ln5));
  }

  // One stage dominates every position.
  auto dominated = random_emissions(8, rng, 1.0);
  for (std::size_t i = 0; i < dominated.size(); ++i) dominated[i][i % kNumStages] += 50.0;
  const auto some = random_crf(rng, 1.0);
  double dominated_max = 0.0;
  const auto dom_path = sequence::viterbi_decode(dominated, some).stages;
  for (double u : sequence::uncertainty_scores(dom_path, dominated, some)) dominated_max = std::max(dominated_max, u);

  return pass_if(in_range && uniform_error <= 1e-9 && dominated_max < 1e-6,
                 fmt("range [%.3g, %.6f] vs ln5 %.6f, |U - ln5| uniform %.1e, dominating max %.1e", lo, hi, ln5,
                     uniform_error, dominated_max));
}

// --- 4 ----------------------------------------------------------------------

Outcome metrics_oracle() {
  std::mt19937_64 rng(404);
  int exact_mismatch = 0;
  double worst_f1 = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::uniform_int_distribution<std::int64_t> count(0, i % 3 == 0 ? 5 : 5000);
    eval::ConfusionMatrix cm;
    for (auto& row : cm.counts) {
      for (auto& v : row) v = count(rng);
    }
    if (cm.total() == 0) cm.counts[0][0] = 1;
    const auto m = eval::compute_metrics(cm);
    const auto r = testing::reference_metrics(cm.counts);
    if (m.accuracy != r.accuracy || m.kappa != r.kappa) ++exact_mismatch;
    worst_f1 = std::max(worst_f1, std::abs(m.macro_f1 - r.macro_f1));
    for (int c = 0; c < kNumStages; ++c) worst_f1 = std::max(worst_f1, std::abs(m.per_class_f1[c] - r.per_class_f1[c]));
  }
  eval::ConfusionMatrix hand;
  hand.counts[0][0] = 40;
  hand.counts[0][1] = 10;
  hand.counts[1][0] = 20;
  hand.counts[1][1] = 30;
  const double kappa = eval::compute_metrics(hand).kappa;
  return pass_if(exact_mismatch == 0 && worst_f1 <= 1e-9 && kappa == 0.40,
                 fmt("1000 matrices: %d accuracy/kappa mismatches, max F1 error %.1e; hand case kappa %.17g",
                     exact_mismatch, worst_f1, kappa));
}

// --- 5 ----------------------------------------------------------------------

Outcome emd_oracle() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> size(1, 10);
  std::normal_distribution<double> normal(0.0, 3.0);
  auto sample = [&] {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (auto& x : v) x = normal(rng);
    return v;
  };
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto a = sample();
    const auto b = sample();
    worst = std::max(worst, std::abs(eval::wasserstein1(a, b) - testing::transport_lp(a, b)));
  }
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = sample();
    const auto b = sample();
    const auto c = sample();
    const double ab = eval::wasserstein1(a, b);
    if (eval::wasserstein1(a, a) != 0.0) ++violations;
    if (ab < 0.0) ++violations;
    if (std::abs(ab - eval::wasserstein1(b, a)) > 1e-12) ++violations;
    if (ab > eval::wasserstein1(a, c) + eval::wasserstein1(c, b) + 1e-12) ++violations;
  }
  return pass_if(worst <= 1e-9 && violations == 0,
                 fmt("max |W1 - LP| %.1e over 500 pairs, %d axiom violations over 1000 triples", worst, violations));
}

// --- shared synthetic setup for 6 to 9 ---------------------------------------

ingest::SyntheticConfig synthetic(int subjects, const std::string& prefix, bool labeled, std::uint64_t seed) {
  ingest::SyntheticConfig c;
  c.subjects = subjects;
  c.epochs_per_subject = 400;  // 40 sequences of 10
  c.sampling_rate_hz = 4;
  c.subject_prefix = prefix;
  c.labeled = labeled;
  c.seed = seed;
  return c;
}

json small_run_json(const fs::path& manifest, const fs::path& out_dir) {
  return {
      {"seed", 11},
      {"output_dir", out_dir.string()},
      {"data", {{"manifest", manifest.string()}, {"sequence_length", 10}, {"val_fraction", 0.2}}},
      {"feature_net",
       {{"latent_dim_subject", 16},
        {"latent_dim_sleep", 16},
        {"encoder_base_width", 8},
        {"encoder_blocks", {1, 1}},
        {"encoder_expansion", 2},
        {"decoder_hidden", 32},
        {"decoder_channels", 8},
        {"prior_hidden", 32},
        {"projection_hidden", 32},
        {"projection_dim", 16}}},
      {"classifier", {{"layers", 1}, {"heads", 4}, {"model_dim", 32}, {"feed_forward_dim", 64}, {"dropout", 0.1}}},
      {"train", {{"feature_epochs", 10}, {"classifier_epochs", 20}, {"batch_size", 16}, {"patience", 0}}}};
}

struct Workspace {
  testing::TempDir dir{"hypnos-acceptance"};
  ingest::DatasetManifest labeled;
  ingest::DatasetManifest unlabeled;
  std::vector<EpochTable> tables;     // S00..S04
  std::vector<EpochTable> unlabeled_tables;

  Workspace() {
    labeled = ingest::write_synthetic_dataset(dir / "labeled", synthetic(5, "S", true, 1));
    unlabeled = ingest::write_synthetic_dataset(dir / "unlabeled", synthetic(3, "U", false, 2));
    for (const auto& id : labeled.subject_ids()) tables.push_back(labeled.load_subject(id));
    for (const auto& id : unlabeled.subject_ids()) unlabeled_tables.push_back(unlabeled.load_subject(id));
  }

  config::RunConfig run(const std::string& variant = "full") const {
    auto j = small_run_json(dir / "labeled" / "manifest.json", dir / "runs");
    j["variant"] = variant;
    return config::from_json(j);
  }
};

// --- 6 ----------------------------------------------------------------------

Outcome overfit(const Workspace& ws) {
  const auto t0 = Clock::now();
  const auto run = ws.run();
  eval::SplitTables split;
  split.train = ws.tables;
  const auto models = eval::train_models(split, run);
  const auto& history = models.classifier.history;
  const double final_accuracy = history.back().at("train_accuracy").get<double>();
  double first_hit = -1;
  for (const auto& h : history) {
    if (h.at("train_accuracy").get<double>() >= 95.0) {
      first_hit = h.at("epoch").get<int>();
      break;
    }
  }
  const double secs = seconds_since(t0);
  return pass_if(final_accuracy >= 95.0 && history.size() <= 20 && secs < 900.0,
                 fmt("stage-2 training accuracy %.2f%% after %zu epochs (first >= 95%% at epoch %.0f), %.1f s",
                     final_accuracy, history.size(), first_hit, secs));
}

// --- 7 ----------------------------------------------------------------------

Outcome disentanglement(const Workspace& ws) {
  const auto run = ws.run();
  std::vector<EpochTable> train(ws.tables.begin(), ws.tables.end() - 1);
  std::vector<EpochTable> validation(ws.tables.end() - 1, ws.tables.end());
  auto stage1 = train::train_feature_stage({train, {}, validation},
                                           eval::feature_config_for(run, ws.labeled.sampling_rate_hz),
                                           eval::train_config_for(run));
  const auto data = train::stack_epochs(train, stage1.vocabulary, true);
  auto& net = stage1.net;
  net->eval();
  torch::NoGradGuard no_grad;
  const auto [q_d, q_y] = net->encode(data.x);
  const auto seed = derive_seed(run.seed, SeedPurpose::kProbe);
  const auto subjects = stage1.vocabulary.size();
  const double class_on_y = eval::linear_probe(q_y.mean, data.stages, kNumStages, seed).test_accuracy;
  const double class_on_d = eval::linear_probe(q_d.mean, data.stages, kNumStages, seed).test_accuracy;
  const double subject_on_d = eval::linear_probe(q_d.mean, data.subjects, subjects, seed).test_accuracy;
  const double subject_on_y = eval::linear_probe(q_y.mean, data.subjects, subjects, seed).test_accuracy;
  return pass_if(class_on_y - class_on_d >= 20.0 && subject_on_d - subject_on_y >= 20.0,
                 fmt("class probe z_y %.1f%% vs z_d %.1f%%; subject probe z_d %.1f%% vs z_y %.1f%%", class_on_y,
                     class_on_d, subject_on_d, subject_on_y));
}

// --- 8 ----------------------------------------------------------------------

int cli(const std::vector<std::string>& args, std::string* captured = nullptr) {
  std::vector<std::string> storage = args;
  storage.insert(storage.begin(), "hypnos");
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  char* envp[] = {nullptr};
  std::ostringstream out;
  std::ostringstream err;
  const int code = hypnos::cli::run(static_cast<int>(storage.size()), argv.data(), envp, out, err);
  if (captured) *captured = out.str() + err.str();
  return code;
}

std::string checkpoint_id_at(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  return json::parse(in).at("id").get<std::string>();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome semi_supervised(const Workspace& ws) {
  auto run = ws.run();
  run.train.feature_epochs = 5;
  eval::SplitTables split;
  split.train = {ws.tables.begin(), ws.tables.end() - 1};
  split.validation = {ws.tables.back()};
  split.unlabeled = ws.unlabeled_tables;
  const auto models = eval::train_models(split, run);
  const auto& h = models.features.history;
  const double cl1 = h.front().at("validation_terms").at("cl_subject").get<double>();
  const double cl5 = h.back().at("validation_terms").at("cl_subject").get<double>();
  const auto unlabeled_batches = h.front().at("unlabeled_batches").get<std::size_t>();
  const bool ran = unlabeled_batches > 0 && h.size() == 5;

  // Same stage-1 checkpoint, stage 2 run with and without the unlabeled set.
  const fs::path cfg = ws.dir / "semi.json";
  auto j = small_run_json(ws.dir / "labeled" / "manifest.json", ws.dir / "semi_a");
  j["train"]["feature_epochs"] = 2;
  j["train"]["classifier_epochs"] = 3;
  std::ofstream(cfg) << j.dump();
  const std::string unl = (ws.dir / "unlabeled" / "manifest.json").string();
  const std::string a = (ws.dir / "semi_a").string();
  const std::string b = (ws.dir / "semi_b").string();
  const std::string c = (ws.dir / "semi_c").string();
  int rc = cli({"train", "--config", cfg.string(), "--stage", "features", "--out-dir", a, "--unlabeled-manifest", unl});
  rc |= cli({"train", "--config", cfg.string(), "--stage", "features", "--out-dir", c});
  fs::create_directories(b);
  fs::copy(fs::path(a) / "feature", fs::path(b) / "feature", fs::copy_options::recursive);
  rc |= cli({"train", "--config", cfg.string(), "--stage", "classifier", "--out-dir", a, "--unlabeled-manifest", unl});
  rc |= cli({"train", "--config", cfg.string(), "--stage", "classifier", "--out-dir", b});
  const bool stage1_differs = checkpoint_id_at(fs::path(a) / "feature") != checkpoint_id_at(fs::path(c) / "feature");
  const bool stage2_identical =
      rc == 0 && checkpoint_id_at(fs::path(a) / "classifier") == checkpoint_id_at(fs::path(b) / "classifier");
  return pass_if(ran && cl5 < cl1 && stage1_differs && stage2_identical,
                 fmt("%zu unlabeled batches/epoch, validation L_CL_d %.4f -> %.4f (epochs 1 -> 5); stage-1 "
                     "checkpoint %s with the unlabeled set toggled, stage-2 checkpoint %s",
                     unlabeled_batches, cl1, cl5, stage1_differs ? "changes" : "does not change",
                     stage2_identical ? "byte-identical" : "differs"));
}

// --- 9 ----------------------------------------------------------------------

Outcome ablation(const Workspace& ws) {
  eval::SplitTables split;
  split.train = {ws.tables.begin(), ws.tables.end() - 1};
  split.validation = {ws.tables.back()};
  auto accuracy = [&](const std::string& variant) {
    const auto run = ws.run(variant);
    auto models = eval::train_models(split, run);
    const auto ev = eval::evaluate_tables(models.features.net, models.classifier.classifier, split.validation,
                                          run.data.sequence_length);
    return eval::compute_metrics(ev.confusion).accuracy;
  };
  const double full = accuracy("full");
  std::string detail = fmt("full %.2f%%", full);
  bool ok = true;
  for (const char* v : {"no_crf", "no_vae_losses", "no_scl", "no_augmentation"}) {
    const double a = accuracy(v);
    ok = ok && full >= a;
    detail += fmt(", %s %.2f%%", v, a);
  }
  return pass_if(ok, detail);
}

// --- 10 ---------------------------------------------------------------------

Outcome real_data_smoke() {
  const char* raw = std::getenv("SLEEPEDF20_DIR");
  if (raw == nullptr || !fs::is_directory(raw)) {
    return {Verdict::kSkip, "set SLEEPEDF20_DIR to a SleepEDF-20 download to run"};
  }
  const auto t0 = Clock::now();
  testing::TempDir dir("hypnos-sleepedf");
  ingest::IngestOptions options;
  options.kind = ingest::DatasetKind::kSleepEdf;
  options.channel = "EEG Fpz-Cz";
  const auto ingested = ingest::ingest_directory(raw, dir / "canonical", dir / "manifest.json", options);
  const auto ids = ingested.manifest.subject_ids();
  if (ids.size() < 6) return {Verdict::kFail, fmt("only %zu subjects ingested", ids.size())};
  // Four training subjects, one for validation, one held out.
  std::vector<EpochTable> train;
  for (std::size_t i = 0; i < 4; ++i) train.push_back(ingested.manifest.load_subject(ids[i]));
  const std::vector<EpochTable> validation{ingested.manifest.load_subject(ids[4])};
  const std::vector<EpochTable> test{ingested.manifest.load_subject(ids[5])};

  auto j = small_run_json(dir / "manifest.json", dir / "run");
  j["train"]["feature_epochs"] = 5;
  j["train"]["classifier_epochs"] = 5;
  j["train"]["batch_size"] = 64;
  j["data"]["sequence_length"] = 20;
  const auto run = config::from_json(j);
  auto models = eval::train_models({train, validation, test, {}}, run);
  const auto ev = eval::evaluate_tables(models.features.net, models.classifier.classifier, test, 20);
  const double accuracy = eval::compute_metrics(ev.confusion).accuracy;

  std::vector<SleepStage> labels;
  for (const auto& t : train) {
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (t.labeled(r)) labels.push_back(t.stage(r));
    }
  }
  const auto majority = eval::MajorityBaseline::fit(labels).predict();
  const auto m = stage_index(majority);
  std::int64_t truly_majority = 0;
  for (int j = 0; j < kNumStages; ++j) truly_majority += ev.confusion.counts[m][j];
  const double baseline =
      100.0 * static_cast<double>(truly_majority) / static_cast<double>(ev.confusion.total());
  const double secs = seconds_since(t0);
  return pass_if(accuracy >= baseline + 10.0 && secs <= 7200.0,
                 fmt("test accuracy %.2f%% vs majority baseline %.2f%%, %.0f s", accuracy, baseline, secs));
}

// --- 11 ---------------------------------------------------------------------

Outcome determinism() {
  testing::TempDir dir("hypnos-determinism");
  std::vector<std::string> differing;
  auto same = [&](const std::string& what, const std::string& x, const std::string& y) {
    if (x != y || x.empty()) differing.push_back(what);
  };
  int rc = 0;
  for (const char* side : {"a", "b"}) {
    const fs::path root = dir / side;
    rc |= cli({"synth", "--out", (root / "data").string(), "--subjects", "4", "--epochs", "120", "--seed", "9"});
    auto j = small_run_json(root / "data" / "manifest.json", root / "train");
    j["train"]["feature_epochs"] = 2;
    j["train"]["classifier_epochs"] = 2;
    j["data"]["max_folds"] = 2;
    std::ofstream(root / "run.json") << j.dump();
    rc |= cli({"train", "--config", (root / "run.json").string()});
    rc |= cli({"predict", "--checkpoint", (root / "train").string(), "--recording", (root / "data" / "S00.hyc").string(),
               "--out", (root / "pred.jsonl").string()});
    rc |= cli({"evaluate", "--config", (root / "run.json").string(), "--out-dir", (root / "eval").string()});
  }
  const fs::path a = dir / "a";
  const fs::path b = dir / "b";
  same("synthetic data", read_file(a / "data" / "S00.hyc"), read_file(b / "data" / "S00.hyc"));
  same("feature checkpoint", checkpoint_id_at(a / "train" / "feature"), checkpoint_id_at(b / "train" / "feature"));
  same("classifier checkpoint", checkpoint_id_at(a / "train" / "classifier"),
       checkpoint_id_at(b / "train" / "classifier"));
  same("predictions", read_file(a / "pred.jsonl"), read_file(b / "pred.jsonl"));
  same("fold metrics", read_file(a / "eval" / "folds.jsonl"), read_file(b / "eval" / "folds.jsonl"));
  same("worst-case report", read_file(a / "eval" / "worst_case.jsonl"), read_file(b / "eval" / "worst_case.jsonl"));
  std::string detail = "synth, train, predict and evaluate run twice with seed 11: ";
  if (differing.empty()) {
    detail += "all outputs identical";
  } else {
    for (const auto& d : differing) detail += d + " differs; ";
  }
  return pass_if(rc == 0 && differing.empty(), rc == 0 ? detail : detail + " (a command failed)");
}

}  // namespace

// Runs every criterion, or only those whose numbers are given as arguments.
int main(int argc, char** argv) {
  torch::set_num_threads(1);
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto selected = [&](int number) { return only.empty() || only.count(number) > 0; };
  int failures = 0;
  auto report = [&](int number, const char* name, const std::function<Outcome()>& check) {
    if (!selected(number)) return;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Verdict::kFail, std::string("threw: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::kPass ? "PASS" : o.verdict == Verdict::kSkip ? "SKIP" : "FAIL";
    if (o.verdict == Verdict::kFail) ++failures;
    std::cout << "[" << tag << "] criterion " << number << " " << name << ": " << o.detail << std::endl;
  };
  report(1, "crf oracle", crf_oracle);
  report(2, "gradients", gradient_check);
  report(3, "uncertainty", uncertainty_properties);
  report(4, "metrics oracle", metrics_oracle);
  report(5, "emd oracle", emd_oracle);
  std::unique_ptr<Workspace> ws;
  try {
    if (selected(6) || selected(7) || selected(8) || selected(9)) ws = std::make_unique<Workspace>();
  } catch (const std::exception& e) {
    std::cout << "synthetic workspace failed: " << e.what() << std::endl;
  }
  auto with_ws = [&](Outcome (*check)(const Workspace&)) {
    return [&ws, check]() -> Outcome {
      if (!ws) return {Verdict::kFail, "no synthetic workspace"};
      return check(*ws);
    };
  };
  report(6, "overfit sanity", with_ws(overfit));
  report(7, "disentanglement", with_ws(disentanglement));
  report(8, "semi-supervised path", with_ws(semi_supervised));
  report(9, "ablation direction", with_ws(ablation));
  report(10, "real-data smoke", real_data_smoke);
  report(11, "determinism", determinism);
  return failures == 0 ? 0 : 1;
}
