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

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "hypnos/features/feature_net.hpp"
#include "hypnos/features/losses.hpp"
#include "hypnos/train/checkpoint.hpp"
#include "hypnos/train/config.hpp"
#include "hypnos/train/data.hpp"

namespace hypnos::train {

struct FeatureEpochLog {
  int epoch = 0;
  double labeled_loss = 0.0;    // mean labeled objective
  double unlabeled_loss = 0.0;  // mean unlabeled objective
  std::size_t labeled_batches = 0;
  std::size_t unlabeled_batches = 0;
  double validation_loss = 0.0;  // selection criterion
  nlohmann::json validation_terms = nlohmann::json::object();
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

struct FeatureTrainerOptions {
  features::LossSwitches switches;  // derived from the ablation unless overridden
  // Parameter-name prefixes that receive updates; empty trains everything.
  std::vector<std::string> trainable_prefixes;
};

// Stage 1. Each epoch runs the unlabeled batches (subject contrastive term
// only) and then the labeled batches (full objective). Every source epoch of
// a batch contributes both views, adjacent in the batch. Randomness is
// re-derived from the root seed per epoch, so a restored trainer continues
// exactly as an uninterrupted one.
class FeatureTrainer {
 public:
  FeatureTrainer(const features::FeatureNetConfig& net_config, const TrainConfig& config, EpochData labeled,
                 EpochData unlabeled, EpochData validation, FeatureTrainerOptions options);
  FeatureTrainer(const features::FeatureNetConfig& net_config, const TrainConfig& config, EpochData labeled,
                 EpochData unlabeled, EpochData validation);

  features::FeatureNet& net() { return net_; }
  int epochs_done() const { return epoch_; }
  int best_epoch() const { return best_epoch_; }
  bool finished() const;

  FeatureEpochLog run_epoch();
  // Runs until the epoch budget or early stopping, then loads the best
  // weights into net().
  std::vector<FeatureEpochLog> run();

  // Labeled objective terms on the validation set with fixed views and
  // noise, in evaluation mode. Falls back to the training set without one.
  features::FeatureLossTerms evaluate(const EpochData& data);

  // Full resumable state: live weights, best weights, Adam moments.
  // Copies matching tensors (non-strict) into the model before training.
  void initialize_from(const TensorMap& tensors, const std::string& prefix = {});

  Checkpoint state() const;
  void restore(const Checkpoint& state);

  const nlohmann::json& history() const { return history_; }

 private:
  features::ViewBatch make_views(const EpochData& data, const std::vector<std::int64_t>& rows,
                                 std::mt19937_64& rng) const;
  std::vector<torch::Tensor> trainable_parameters();

  features::FeatureNetConfig net_config_;
  TrainConfig config_;
  EpochData labeled_, unlabeled_, validation_;
  FeatureTrainerOptions options_;
  features::FeatureNet net_{nullptr};
  std::unique_ptr<torch::optim::Adam> optimizer_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_loss_ = 0.0;
  TensorMap best_state_;
  nlohmann::json history_ = nlohmann::json::array();
};

features::LossSwitches switches_for(const Ablation& ablation);

// Appends one JSON line to path (no-op when path is empty).
void append_log_line(const std::string& path, const nlohmann::json& record);

}  // namespace hypnos::train
