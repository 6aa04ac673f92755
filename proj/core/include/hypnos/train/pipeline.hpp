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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "hypnos/features/feature_net.hpp"
#include "hypnos/sequence/classifier.hpp"
#include "hypnos/train/checkpoint.hpp"
#include "hypnos/train/classifier_trainer.hpp"
#include "hypnos/train/config.hpp"
#include "hypnos/train/data.hpp"

namespace hypnos::train {

nlohmann::json feature_config_json(const features::FeatureNetConfig& config);
features::FeatureNetConfig feature_config_from_json(const nlohmann::json& j);
nlohmann::json classifier_config_json(const sequence::ClassifierConfig& config);
sequence::ClassifierConfig classifier_config_from_json(const nlohmann::json& j);

struct SequenceOptions {
  std::size_t length = 20;
  std::size_t stride = 0;  // 0: non-overlapping

  std::size_t effective_stride() const { return stride == 0 ? length : stride; }
};

struct FeatureStageInputs {
  std::vector<EpochTable> labeled;
  std::vector<EpochTable> unlabeled;
  std::vector<EpochTable> validation;
};

struct FeatureStageResult {
  features::FeatureNet net{nullptr};
  SubjectVocabulary vocabulary;
  nlohmann::json history;
  int best_epoch = 0;
  Checkpoint checkpoint;  // stage "feature", best weights
};

// Stage 1. The subject vocabulary is the set of labeled subjects and fixes
// config.num_subjects. With a state_dir, the resumable state is written
// after every epoch and picked up again if present.
FeatureStageResult train_feature_stage(const FeatureStageInputs& inputs, features::FeatureNetConfig config,
                                       const TrainConfig& train_config,
                                       const std::filesystem::path& state_dir = {});

struct ClassifierStageResult {
  sequence::SequenceClassifier classifier{nullptr};
  nlohmann::json history;
  int best_epoch = 0;
  Checkpoint checkpoint;  // stage "classifier", parent = feature checkpoint
  std::string encoder_digest_before;
  std::string encoder_digest_after;
};

// Throws CheckpointError unless feature_checkpoint is a stage-1 checkpoint.
features::FeatureNet load_feature_net(const Checkpoint& feature_checkpoint);
sequence::SequenceClassifier load_classifier(const Checkpoint& classifier_checkpoint);

// Stage 2 on top of a frozen stage-1 checkpoint.
ClassifierStageResult train_classifier_stage(const Checkpoint& feature_checkpoint,
                                             const std::vector<EpochTable>& train,
                                             const std::vector<EpochTable>& validation,
                                             sequence::ClassifierConfig config, const TrainConfig& train_config,
                                             const SequenceOptions& sequences,
                                             const std::filesystem::path& state_dir = {},
                                             const TensorMap* initial_weights = nullptr);

struct LoadedModel {
  features::FeatureNet features{nullptr};
  sequence::SequenceClassifier classifier{nullptr};
  SequenceOptions sequences;
  int sampling_rate_hz = 0;
};

// Throws CheckpointError when the classifier does not descend from the
// feature checkpoint.
LoadedModel load_model(const Checkpoint& feature_checkpoint, const Checkpoint& classifier_checkpoint);

// Extract, contextualize, decode and score one sequence of raw epochs [T, N].
sequence::DecodedSequence classify_sequence(features::FeatureNet& features,
                                            sequence::SequenceClassifier& classifier, const torch::Tensor& epochs);

struct FineTuneResult {
  FeatureStageResult features;
  ClassifierStageResult classifier;
  std::vector<std::string> transferred;     // feature-net tensors copied from the source
  std::vector<std::string> reinitialized;  // feature-net tensors left at fresh initialization
};

// Transfer to a target dataset: copies every source tensor whose shape still
// fits (rate-dependent input layers are re-initialized when rates differ),
// fine-tunes the sleep encoder, sleep classifier and sleep projection on
// alpha_y * L_VAE_y + gamma_y * L_SCL_y, then trains the classification
// network starting from the source classifier. Throws TransferError when a
// rate-independent tensor of the fine-tuned branch does not fit.
FineTuneResult fine_tune(const Checkpoint& source_features, const Checkpoint& source_classifier,
                         const FeatureStageInputs& target, const TrainConfig& train_config,
                         const SequenceOptions& sequences);

}  // namespace hypnos::train
