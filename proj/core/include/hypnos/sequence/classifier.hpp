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

#include <vector>

#include <torch/torch.h>

#include "hypnos/sequence/attention.hpp"
#include "hypnos/sequence/config.hpp"
#include "hypnos/sequence/crf.hpp"

namespace hypnos::sequence {

// Trainable linear-chain CRF over the five stages.
class CrfLayerImpl : public torch::nn::Module {
 public:
  CrfLayerImpl();

  // emissions [B, T, 5], stages [B, T] -> [B]
  torch::Tensor log_score(const torch::Tensor& emissions, const torch::Tensor& stages) const;
  torch::Tensor log_partition(const torch::Tensor& emissions) const;
  // Mean negative log-likelihood over the batch.
  torch::Tensor nll(const torch::Tensor& emissions, const torch::Tensor& stages) const;

  CrfParams params() const;
  void set_params(const CrfParams& params);

  torch::Tensor start;       // [5]
  torch::Tensor transition;  // [5, 5], rows index the previous stage
};
TORCH_MODULE(CrfLayer);

struct DecodedSequence {
  std::vector<SleepStage> stages;
  double log_probability = 0.0;
  std::vector<double> uncertainties;
};

// Emission network plus output layer for one of the four head kinds.
class SequenceClassifierImpl : public torch::nn::Module {
 public:
  explicit SequenceClassifierImpl(const ClassifierConfig& config);

  const ClassifierConfig& config() const { return config_; }

  // z [B, T, input_dim] -> per-position stage scores [B, T, 5].
  torch::Tensor emissions(const torch::Tensor& z);
  // CRF negative log-likelihood for CRF heads, per-position cross-entropy otherwise.
  torch::Tensor loss(const torch::Tensor& z, const torch::Tensor& stages);
  // Decodes one sequence z [T, input_dim] in evaluation mode.
  DecodedSequence decode(const torch::Tensor& z);

  TransformerEncoder encoder{nullptr};
  torch::nn::Linear emission{nullptr};
  CrfLayer crf{nullptr};

 private:
  ClassifierConfig config_;
};
TORCH_MODULE(SequenceClassifier);

EmissionMatrix to_emission_matrix(const torch::Tensor& emissions);  // [T, 5]

// Argmax decoding with softmax-entropy uncertainty, for heads without a CRF.
DecodedSequence decode_independent(const EmissionMatrix& emissions);

}  // namespace hypnos::sequence
