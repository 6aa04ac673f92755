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
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "hypnos/features/feature_net.hpp"
#include "hypnos/sequence/classifier.hpp"
#include "hypnos/train/checkpoint.hpp"
#include "hypnos/train/config.hpp"
#include "hypnos/train/data.hpp"

namespace hypnos::train {

// Frozen sleep representations for every fully labeled window of every
// table (or every window when require_labels is false, with stages left
// undefined). Extraction runs in evaluation mode under no-grad.
SequenceSet build_sequence_set(features::FeatureNet& frozen, const std::vector<EpochTable>& tables,
                               std::size_t length, std::size_t stride, bool require_labels = true);

struct ClassifierEpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // percent, decoded in evaluation mode
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
  std::size_t batches = 0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

// Decoded accuracy (percent) and mean loss of a classifier on a set.
struct SetScore {
  double loss = 0.0;
  double accuracy = 0.0;
};
SetScore score_sequences(sequence::SequenceClassifier& classifier, const SequenceSet& set);

// Stage 2: minimizes the sequence loss over fixed representations. The
// encoder never enters this trainer, so it cannot change.
class ClassifierTrainer {
 public:
  ClassifierTrainer(const sequence::ClassifierConfig& config, const TrainConfig& train_config, SequenceSet train,
                    SequenceSet validation);

  sequence::SequenceClassifier& classifier() { return classifier_; }
  int epochs_done() const { return epoch_; }
  int best_epoch() const { return best_epoch_; }
  bool finished() const;

  ClassifierEpochLog run_epoch();
  std::vector<ClassifierEpochLog> run();  // loads the best weights at the end

  // Copies matching tensors (non-strict) into the model before training.
  void initialize_from(const TensorMap& tensors, const std::string& prefix = {});

  Checkpoint state() const;
  void restore(const Checkpoint& state);

  const nlohmann::json& history() const { return history_; }

 private:
  sequence::ClassifierConfig config_;
  TrainConfig train_config_;
  SequenceSet train_, validation_;
  sequence::SequenceClassifier classifier_{nullptr};
  std::unique_ptr<torch::optim::Adam> optimizer_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_loss_ = 0.0;
  TensorMap best_state_;
  nlohmann::json history_ = nlohmann::json::array();
};

}  // namespace hypnos::train
