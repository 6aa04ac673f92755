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

#include "hypnos/train/feature_trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "hypnos/augment/augmentation.hpp"
#include "hypnos/error.hpp"
#include "hypnos/random.hpp"

namespace hypnos::train {

using nlohmann::json;

namespace {

std::vector<std::int64_t> shuffled_rows(std::int64_t n, std::mt19937_64& rng) {
  std::vector<std::int64_t> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  return rows;
}

std::vector<std::vector<std::int64_t>> chunk(const std::vector<std::int64_t>& rows, std::int64_t size) {
  std::vector<std::vector<std::int64_t>> out;
  for (std::size_t i = 0; i < rows.size(); i += static_cast<std::size_t>(size)) {
    out.emplace_back(rows.begin() + static_cast<std::ptrdiff_t>(i),
                     rows.begin() + static_cast<std::ptrdiff_t>(std::min(rows.size(), i + size)));
  }
  return out;
}

double term_value(const torch::Tensor& t) { return t.defined() ? t.item<double>() : 0.0; }

}  // namespace

json FeatureEpochLog::to_json() const {
  return {{"stage", "feature"},
          {"epoch", epoch},
          {"labeled_loss", labeled_loss},
          {"unlabeled_loss", unlabeled_loss},
          {"labeled_batches", labeled_batches},
          {"unlabeled_batches", unlabeled_batches},
          {"validation_loss", validation_loss},
          {"validation_terms", validation_terms},
          {"seconds", seconds}};
}

features::LossSwitches switches_for(const Ablation& ablation) {
  features::LossSwitches s;
  if (ablation.no_vae_losses) s.elbo = s.ce_subject = s.ce_sleep = false;
  if (ablation.no_scl) s.scl = false;
  return s;
}

void append_log_line(const std::string& path, const json& record) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::app);
  out << record.dump() << "\n";
}

FeatureTrainer::FeatureTrainer(const features::FeatureNetConfig& net_config, const TrainConfig& config,
                               EpochData labeled, EpochData unlabeled, EpochData validation)
    : FeatureTrainer(net_config, config, std::move(labeled), std::move(unlabeled), std::move(validation),
                     FeatureTrainerOptions{switches_for(config.ablation), {}}) {}

FeatureTrainer::FeatureTrainer(const features::FeatureNetConfig& net_config, const TrainConfig& config,
                               EpochData labeled, EpochData unlabeled, EpochData validation,
                               FeatureTrainerOptions options)
    : net_config_(net_config),
      config_(config),
      labeled_(std::move(labeled)),
      unlabeled_(std::move(unlabeled)),
      validation_(std::move(validation)),
      options_(std::move(options)) {
  config_.validate();
  if (labeled_.size() == 0) throw EmptyDatasetError("stage 1 needs labeled epochs");
  if (labeled_.epoch_length() != net_config_.epoch_length()) {
    throw ShapeError("labeled epochs do not match the configured sampling rate");
  }
  torch::manual_seed(derive_seed(config_.seed, SeedPurpose::kInitialization));
  net_ = features::FeatureNet(net_config_);
  optimizer_ = std::make_unique<torch::optim::Adam>(trainable_parameters(),
                                                    torch::optim::AdamOptions(config_.learning_rate));
  best_loss_ = std::numeric_limits<double>::infinity();
  best_state_ = module_state(*net_);
}

std::vector<torch::Tensor> FeatureTrainer::trainable_parameters() {
  std::vector<torch::Tensor> out;
  for (auto& p : net_->named_parameters(true)) {
    bool take = options_.trainable_prefixes.empty();
    for (const auto& prefix : options_.trainable_prefixes) take = take || p.key().rfind(prefix, 0) == 0;
    p.value().set_requires_grad(take);
    if (take) out.push_back(p.value());
  }
  return out;
}

bool FeatureTrainer::finished() const {
  if (epoch_ >= config_.feature_epochs) return true;
  return config_.patience > 0 && since_best_ >= config_.patience;
}

features::ViewBatch FeatureTrainer::make_views(const EpochData& data, const std::vector<std::int64_t>& rows,
                                               std::mt19937_64& rng) const {
  const auto n = data.epoch_length();
  const auto b = static_cast<std::int64_t>(rows.size());
  features::ViewBatch batch;
  batch.x = torch::empty({2 * b, n}, torch::kFloat32);
  auto idx = torch::tensor(rows, torch::kInt64).repeat_interleave(2);
  batch.subjects = data.subjects.index_select(0, idx);
  batch.stages = data.stages.index_select(0, idx);
  const bool augment = config_.augmentation.enabled && !config_.ablation.no_augmentation;
  const float* src = data.x.data_ptr<float>();
  float* dst = batch.x.data_ptr<float>();
  for (std::int64_t i = 0; i < b; ++i) {
    const std::span<const float> samples(src + rows[i] * n, static_cast<std::size_t>(n));
    for (int v = 0; v < 2; ++v) {
      float* out = dst + (2 * i + v) * n;
      if (augment) {
        const auto view = augment::augment(samples, config_.augmentation, rng);
        std::copy(view.begin(), view.end(), out);
      } else {
        std::copy(samples.begin(), samples.end(), out);
      }
    }
  }
  return batch;
}

features::FeatureLossTerms FeatureTrainer::evaluate(const EpochData& data) {
  const bool was_training = net_->is_training();
  net_->eval();
  torch::NoGradGuard no_grad;
  auto rng = make_rng(config_.seed, SeedPurpose::kValidation);
  auto generator = at::detail::createCPUGenerator(derive_seed(config_.seed, SeedPurpose::kValidation, 1));
  auto switches = options_.switches;
  const bool known_subjects = data.subjects.numel() > 0 && data.subjects.min().item<std::int64_t>() >= 0;
  if (!known_subjects) {
    switches.subject_prior = false;
    switches.ce_subject = false;
  }
  std::vector<std::int64_t> rows(static_cast<std::size_t>(data.size()));
  std::iota(rows.begin(), rows.end(), 0);
  features::FeatureLossTerms sum;
  double weight_total = 0.0;
  auto accumulate = [](torch::Tensor& acc, const torch::Tensor& v, double w) {
    acc = acc.defined() ? acc + w * v : w * v;
  };
  for (const auto& batch_rows : chunk(rows, config_.batch_size)) {
    const auto batch = make_views(data, batch_rows, rng);
    const auto t = features::feature_loss_labeled(net_, batch, config_.weights, generator, switches);
    const double w = static_cast<double>(batch_rows.size());
    accumulate(sum.reconstruction, t.reconstruction, w);
    accumulate(sum.kl_subject, t.kl_subject, w);
    accumulate(sum.kl_sleep, t.kl_sleep, w);
    accumulate(sum.elbo, t.elbo, w);
    accumulate(sum.ce_subject, t.ce_subject, w);
    accumulate(sum.ce_sleep, t.ce_sleep, w);
    accumulate(sum.cl_subject, t.cl_subject, w);
    accumulate(sum.scl_sleep, t.scl_sleep, w);
    accumulate(sum.total, t.total, w);
    weight_total += w;
  }
  for (auto* t : {&sum.reconstruction, &sum.kl_subject, &sum.kl_sleep, &sum.elbo, &sum.ce_subject, &sum.ce_sleep,
                  &sum.cl_subject, &sum.scl_sleep, &sum.total}) {
    *t = *t / weight_total;
  }
  net_->train(was_training);
  return sum;
}

FeatureEpochLog FeatureTrainer::run_epoch() {
  const auto started = std::chrono::steady_clock::now();
  const auto e = static_cast<std::uint64_t>(epoch_);
  auto batch_rng = make_rng(config_.seed, SeedPurpose::kBatching, e);
  auto augment_rng = make_rng(config_.seed, SeedPurpose::kAugmentation, e);
  auto generator = at::detail::createCPUGenerator(derive_seed(config_.seed, SeedPurpose::kLatentSampling, e));
  torch::manual_seed(derive_seed(config_.seed, SeedPurpose::kDropout, e));
  net_->train();
  const auto params = optimizer_->param_groups().front().params();

  FeatureEpochLog log;
  log.epoch = epoch_ + 1;
  auto step = [&](const torch::Tensor& loss) {
    optimizer_->zero_grad();
    loss.backward();
    if (config_.clip_norm > 0.0) torch::nn::utils::clip_grad_norm_(params, config_.clip_norm);
    optimizer_->step();
  };

  // Unlabeled batches first, then labeled ones.
  if (unlabeled_.size() > 0 && options_.switches.cl_subject) {
    for (const auto& rows : chunk(shuffled_rows(unlabeled_.size(), batch_rng), config_.batch_size)) {
      const auto batch = make_views(unlabeled_, rows, augment_rng);
      const auto loss = features::feature_loss_unlabeled(net_, batch, config_.weights, generator);
      step(loss);
      log.unlabeled_loss += loss.item<double>();
      ++log.unlabeled_batches;
    }
    log.unlabeled_loss /= static_cast<double>(log.unlabeled_batches);
  }
  for (const auto& rows : chunk(shuffled_rows(labeled_.size(), batch_rng), config_.batch_size)) {
    const auto batch = make_views(labeled_, rows, augment_rng);
    const auto terms = features::feature_loss_labeled(net_, batch, config_.weights, generator, options_.switches);
    step(terms.total);
    log.labeled_loss += terms.total.item<double>();
    ++log.labeled_batches;
  }
  log.labeled_loss /= static_cast<double>(log.labeled_batches);

  const auto v = evaluate(validation_.size() > 0 ? validation_ : labeled_);
  log.validation_loss = v.total.item<double>();
  log.validation_terms = {{"reconstruction", term_value(v.reconstruction)}, {"kl_subject", term_value(v.kl_subject)},
                          {"kl_sleep", term_value(v.kl_sleep)},             {"elbo", term_value(v.elbo)},
                          {"ce_subject", term_value(v.ce_subject)},         {"ce_sleep", term_value(v.ce_sleep)},
                          {"cl_subject", term_value(v.cl_subject)},         {"scl_sleep", term_value(v.scl_sleep)}};
  ++epoch_;
  if (log.validation_loss < best_loss_) {
    best_loss_ = log.validation_loss;
    best_epoch_ = epoch_;
    since_best_ = 0;
    best_state_ = module_state(*net_);
  } else {
    ++since_best_;
  }
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  history_.push_back(log.to_json());
  append_log_line(config_.log_path, log.to_json());
  return log;
}

std::vector<FeatureEpochLog> FeatureTrainer::run() {
  std::vector<FeatureEpochLog> logs;
  while (!finished()) logs.push_back(run_epoch());
  load_module_state(*net_, best_state_);
  return logs;
}

void FeatureTrainer::initialize_from(const TensorMap& tensors, const std::string& prefix) {
  load_module_state(*net_, tensors, prefix, false);
  best_state_ = module_state(*net_);
}

Checkpoint FeatureTrainer::state() const {
  Checkpoint c;
  c.stage = "feature-state";
  c.epoch = epoch_;
  c.history = history_;
  c.extra = {{"best_epoch", best_epoch_}, {"since_best", since_best_}, {"best_loss", best_loss_}};
  c.tensors = module_state(*net_, "model.");
  for (const auto& [k, v] : best_state_) c.tensors["best." + k] = v;
  for (auto& [k, v] : adam_state(*optimizer_, *net_)) c.tensors[k] = v;
  return c;
}

void FeatureTrainer::restore(const Checkpoint& s) {
  if (s.stage != "feature-state") throw CheckpointError("not a stage-1 training state: " + s.stage);
  load_module_state(*net_, s.tensors, "model.");
  best_state_.clear();
  for (const auto& [k, v] : s.tensors) {
    if (k.rfind("best.", 0) == 0) best_state_[k.substr(5)] = v.clone();
  }
  load_adam_state(*optimizer_, *net_, s.tensors);
  epoch_ = s.epoch;
  history_ = s.history;
  best_epoch_ = s.extra.at("best_epoch").get<int>();
  since_best_ = s.extra.at("since_best").get<int>();
  const auto& best = s.extra.at("best_loss");
  best_loss_ = best.is_number() ? best.get<double>() : std::numeric_limits<double>::infinity();
}

}  // namespace hypnos::train
