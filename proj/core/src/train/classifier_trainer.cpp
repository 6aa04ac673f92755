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

#include "hypnos/train/classifier_trainer.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>

#include "hypnos/error.hpp"
#include "hypnos/ingest/segment.hpp"
#include "hypnos/random.hpp"
#include "hypnos/train/feature_trainer.hpp"

namespace hypnos::train {

using nlohmann::json;

namespace {

constexpr std::int64_t kExtractionBatch = 256;

}  // namespace

SequenceSet build_sequence_set(features::FeatureNet& frozen, const std::vector<EpochTable>& tables,
                               std::size_t length, std::size_t stride, bool require_labels) {
  SequenceSet out;
  std::vector<torch::Tensor> z;
  std::vector<torch::Tensor> stages;
  const auto latent = frozen->config().latent_dim_sleep;
  for (const auto& table : tables) {
    auto build = ingest::build_sequences(table, length, stride);
    std::vector<EpochSequence> kept;
    for (auto& s : build.sequences) {
      if (!require_labels || s.stages) kept.push_back(std::move(s));
    }
    if (kept.empty()) continue;
    // Representations for every row once, then windows are views into them.
    const auto n = static_cast<std::int64_t>(table.epoch_length());
    const auto rows = static_cast<std::int64_t>(table.size());
    const auto all = torch::from_blob(const_cast<float*>(table.all_samples().data()), {rows, n}, torch::kFloat32);
    std::vector<torch::Tensor> reps;
    for (std::int64_t i = 0; i < rows; i += kExtractionBatch) {
      reps.push_back(frozen->extract_sleep_representation(all.narrow(0, i, std::min(kExtractionBatch, rows - i))));
    }
    const auto table_z = torch::cat(reps);
    for (const auto& s : kept) {
      z.push_back(table_z.narrow(0, static_cast<std::int64_t>(s.first_row), static_cast<std::int64_t>(length)));
      if (s.stages) {
        std::vector<std::int64_t> codes;
        for (auto st : *s.stages) codes.push_back(stage_index(st));
        stages.push_back(torch::tensor(codes, torch::kInt64));
      }
      out.sequences.push_back(s);
    }
  }
  const auto t = static_cast<std::int64_t>(length);
  out.z = z.empty() ? torch::empty({0, t, latent}) : torch::stack(z);
  if (require_labels) out.stages = stages.empty() ? torch::empty({0, t}, torch::kInt64) : torch::stack(stages);
  return out;
}

json ClassifierEpochLog::to_json() const {
  return {{"stage", "classifier"},         {"epoch", epoch},
          {"train_loss", train_loss},      {"train_accuracy", train_accuracy},
          {"validation_loss", validation_loss}, {"validation_accuracy", validation_accuracy},
          {"batches", batches},            {"seconds", seconds}};
}

SetScore score_sequences(sequence::SequenceClassifier& classifier, const SequenceSet& set) {
  SetScore s;
  if (set.size() == 0) return s;
  const bool was_training = classifier->is_training();
  classifier->eval();
  torch::NoGradGuard no_grad;
  s.loss = classifier->loss(set.z, set.stages).item<double>();
  std::int64_t correct = 0;
  const auto truth = set.stages.contiguous();
  const auto* y = truth.data_ptr<std::int64_t>();
  const auto t = set.z.size(1);
  for (std::int64_t i = 0; i < set.size(); ++i) {
    const auto decoded = classifier->decode(set.z[i]);
    for (std::int64_t j = 0; j < t; ++j) correct += stage_index(decoded.stages[j]) == y[i * t + j] ? 1 : 0;
  }
  s.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(set.size() * t);
  classifier->train(was_training);
  return s;
}

ClassifierTrainer::ClassifierTrainer(const sequence::ClassifierConfig& config, const TrainConfig& train_config,
                                     SequenceSet train, SequenceSet validation)
    : config_(config), train_config_(train_config), train_(std::move(train)), validation_(std::move(validation)) {
  train_config_.validate();
  if (train_.size() == 0) throw EmptyDatasetError("stage 2 needs at least one labeled sequence");
  torch::manual_seed(derive_seed(train_config_.seed, SeedPurpose::kInitialization, 2));
  classifier_ = sequence::SequenceClassifier(config_);
  optimizer_ = std::make_unique<torch::optim::Adam>(classifier_->parameters(),
                                                    torch::optim::AdamOptions(train_config_.learning_rate));
  best_loss_ = std::numeric_limits<double>::infinity();
  best_state_ = module_state(*classifier_);
}

bool ClassifierTrainer::finished() const {
  if (epoch_ >= train_config_.classifier_epochs) return true;
  return train_config_.patience > 0 && since_best_ >= train_config_.patience;
}

ClassifierEpochLog ClassifierTrainer::run_epoch() {
  const auto started = std::chrono::steady_clock::now();
  const auto e = static_cast<std::uint64_t>(epoch_);
  auto rng = make_rng(train_config_.seed, SeedPurpose::kBatching, 1000 + e);
  torch::manual_seed(derive_seed(train_config_.seed, SeedPurpose::kDropout, 1000 + e));
  classifier_->train();
  std::vector<std::int64_t> order(static_cast<std::size_t>(train_.size()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  ClassifierEpochLog log;
  log.epoch = epoch_ + 1;
  const auto b = train_config_.batch_size;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(b)) {
    const auto end = std::min(order.size(), i + static_cast<std::size_t>(b));
    const auto idx = torch::tensor(std::vector<std::int64_t>(order.begin() + static_cast<std::ptrdiff_t>(i),
                                                             order.begin() + static_cast<std::ptrdiff_t>(end)),
                                   torch::kInt64);
    optimizer_->zero_grad();
    const auto loss = classifier_->loss(train_.z.index_select(0, idx), train_.stages.index_select(0, idx));
    loss.backward();
    if (train_config_.clip_norm > 0.0) {
      torch::nn::utils::clip_grad_norm_(classifier_->parameters(), train_config_.clip_norm);
    }
    optimizer_->step();
    log.train_loss += loss.item<double>();
    ++log.batches;
  }
  log.train_loss /= static_cast<double>(log.batches);
  log.train_accuracy = score_sequences(classifier_, train_).accuracy;
  const auto v = score_sequences(classifier_, validation_.size() > 0 ? validation_ : train_);
  log.validation_loss = v.loss;
  log.validation_accuracy = v.accuracy;

  ++epoch_;
  if (log.validation_loss < best_loss_) {
    best_loss_ = log.validation_loss;
    best_epoch_ = epoch_;
    since_best_ = 0;
    best_state_ = module_state(*classifier_);
  } else {
    ++since_best_;
  }
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  history_.push_back(log.to_json());
  append_log_line(train_config_.log_path, log.to_json());
  return log;
}

std::vector<ClassifierEpochLog> ClassifierTrainer::run() {
  std::vector<ClassifierEpochLog> logs;
  while (!finished()) logs.push_back(run_epoch());
  load_module_state(*classifier_, best_state_);
  return logs;
}

void ClassifierTrainer::initialize_from(const TensorMap& tensors, const std::string& prefix) {
  load_module_state(*classifier_, tensors, prefix, false);
  best_state_ = module_state(*classifier_);
}

Checkpoint ClassifierTrainer::state() const {
  Checkpoint c;
  c.stage = "classifier-state";
  c.epoch = epoch_;
  c.history = history_;
  c.extra = {{"best_epoch", best_epoch_}, {"since_best", since_best_}, {"best_loss", best_loss_}};
  c.tensors = module_state(*classifier_, "model.");
  for (const auto& [k, v] : best_state_) c.tensors["best." + k] = v;
  for (auto& [k, v] : adam_state(*optimizer_, *classifier_)) c.tensors[k] = v;
  return c;
}

void ClassifierTrainer::restore(const Checkpoint& s) {
  if (s.stage != "classifier-state") throw CheckpointError("not a stage-2 training state: " + s.stage);
  load_module_state(*classifier_, s.tensors, "model.");
  best_state_.clear();
  for (const auto& [k, v] : s.tensors) {
    if (k.rfind("best.", 0) == 0) best_state_[k.substr(5)] = v.clone();
  }
  load_adam_state(*optimizer_, *classifier_, s.tensors);
  epoch_ = s.epoch;
  history_ = s.history;
  best_epoch_ = s.extra.at("best_epoch").get<int>();
  since_best_ = s.extra.at("since_best").get<int>();
  const auto& best = s.extra.at("best_loss");
  best_loss_ = best.is_number() ? best.get<double>() : std::numeric_limits<double>::infinity();
}

}  // namespace hypnos::train
