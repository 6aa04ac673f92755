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

#include <algorithm>
#include <cmath>
#include <string>

#include "hypnos/error.hpp"
#include "hypnos/features/config.hpp"
#include "hypnos/sequence/config.hpp"
#include "hypnos/train/config.hpp"

namespace hypnos {

namespace features {

std::int64_t FeatureNetConfig::stem_kernel() const {
  std::int64_t k = std::max<std::int64_t>(3, sampling_rate_hz / 4);
  return k % 2 == 0 ? k + 1 : k;
}

void FeatureNetConfig::validate() const {
  if (sampling_rate_hz <= 0) throw ConfigError("feature_net: sampling rate must be positive");
  if (num_subjects < 1) throw ConfigError("feature_net: need at least one training subject");
  if (latent_dim_subject < 1 || latent_dim_sleep < 1) throw ConfigError("feature_net: latent dims must be positive");
  if (encoder.base_width < 1 || encoder.expansion < 1 || encoder.blocks.empty()) {
    throw ConfigError("feature_net: encoder widths and block counts must be positive");
  }
  for (auto b : encoder.blocks) {
    if (b < 1) throw ConfigError("feature_net: every encoder stage needs at least one block");
  }
  if (decoder_hidden < 1 || prior_hidden < 1 || projection_hidden < 1 || projection_dim < 1) {
    throw ConfigError("feature_net: hidden sizes must be positive");
  }
  if (decoder_channels < 4) throw ConfigError("feature_net: decoder_channels must be at least 4");
}

void FeatureLossWeights::validate() const {
  for (double w : {alpha_d, alpha_y, beta, gamma_d, gamma_y}) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("loss weights must be finite and nonnegative");
  }
  if (!std::isfinite(rho) || rho <= 0.0) throw ConfigError("loss.rho must be positive");
}

}  // namespace features

namespace sequence {

void TransformerConfig::validate() const {
  if (layers < 0 || heads < 1 || model_dim < 1 || feed_forward_dim < 1) {
    throw ConfigError("classifier: transformer sizes must be positive");
  }
  if (model_dim % heads != 0) {
    throw ConfigError("classifier: model_dim " + std::to_string(model_dim) +
                      " is not divisible by heads " + std::to_string(heads));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("classifier: dropout must be in [0, 1)");
}

std::string_view head_kind_name(HeadKind kind) {
  switch (kind) {
    case HeadKind::kTransformerCrf:
      return "transformer_crf";
    case HeadKind::kTransformerLinear:
      return "transformer_linear";
    case HeadKind::kLogisticCrf:
      return "logistic_crf";
    case HeadKind::kLogistic:
      return "logistic";
  }
  return "transformer_crf";
}

HeadKind parse_head_kind(std::string_view name) {
  for (HeadKind k : {HeadKind::kTransformerCrf, HeadKind::kTransformerLinear, HeadKind::kLogisticCrf,
                     HeadKind::kLogistic}) {
    if (head_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown classifier head '" + std::string(name) + "'");
}

bool ClassifierConfig::uses_transformer() const {
  return head == HeadKind::kTransformerCrf || head == HeadKind::kTransformerLinear;
}

bool ClassifierConfig::uses_crf() const {
  return head == HeadKind::kTransformerCrf || head == HeadKind::kLogisticCrf;
}

void ClassifierConfig::validate() const {
  if (input_dim < 1) throw ConfigError("classifier: input_dim must be positive");
  if (uses_transformer()) transformer.validate();
}

}  // namespace sequence

namespace train {

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("train.batch_size must be at least 2");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("train.learning_rate must be positive");
  if (feature_epochs < 0 || classifier_epochs < 0) throw ConfigError("train epoch counts must be nonnegative");
  if (patience < 0) throw ConfigError("train.patience must be nonnegative");
  if (!(clip_norm > 0.0)) throw ConfigError("train.clip_norm must be positive");
  weights.validate();
  augmentation.validate();
}

}  // namespace train

}  // namespace hypnos
