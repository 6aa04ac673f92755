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

#include "hypnos/sequence/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "hypnos/error.hpp"

namespace hypnos::sequence {

CrfLayerImpl::CrfLayerImpl() {
  start = register_parameter("start", torch::zeros({kNumStages}));
  transition = register_parameter("transition", torch::zeros({kNumStages, kNumStages}));
}

torch::Tensor CrfLayerImpl::log_score(const torch::Tensor& emissions, const torch::Tensor& stages) const {
  const auto t = emissions.size(1);
  auto score = start.index_select(0, stages.select(1, 0)) +
               emissions.select(1, 0).gather(1, stages.select(1, 0).unsqueeze(1)).squeeze(1);
  for (std::int64_t i = 1; i < t; ++i) {
    const auto prev = stages.select(1, i - 1);
    const auto next = stages.select(1, i);
    score = score + transition.index({prev, next}) +
            emissions.select(1, i).gather(1, next.unsqueeze(1)).squeeze(1);
  }
  return score;
}

torch::Tensor CrfLayerImpl::log_partition(const torch::Tensor& emissions) const {
  auto alpha = start.unsqueeze(0) + emissions.select(1, 0);  // [B, 5]
  for (std::int64_t i = 1; i < emissions.size(1); ++i) {
    alpha = torch::logsumexp(alpha.unsqueeze(2) + transition.unsqueeze(0), 1) + emissions.select(1, i);
  }
  return torch::logsumexp(alpha, 1);
}

torch::Tensor CrfLayerImpl::nll(const torch::Tensor& emissions, const torch::Tensor& stages) const {
  if (emissions.dim() != 3 || emissions.size(2) != kNumStages || stages.sizes() != emissions.sizes().slice(0, 2)) {
    throw ShapeError("CRF expects emissions [B, T, 5] and stages [B, T]");
  }
  if (stages.numel() > 0 && (stages.min().item<std::int64_t>() < 0 || stages.max().item<std::int64_t>() >= kNumStages)) {
    throw LabelError("stage index outside 0..4");
  }
  const auto value = (log_partition(emissions) - log_score(emissions, stages)).mean();
  if (!std::isfinite(value.item<double>())) throw NumericalError("non-finite CRF negative log-likelihood");
  return value;
}

CrfParams CrfLayerImpl::params() const {
  CrfParams p;
  const auto s = start.detach().to(torch::kFloat64).contiguous();
  const auto tr = transition.detach().to(torch::kFloat64).contiguous();
  for (int a = 0; a < kNumStages; ++a) {
    p.start[a] = s[a].item<double>();
    for (int b = 0; b < kNumStages; ++b) p.transition[a][b] = tr[a][b].item<double>();
  }
  return p;
}

void CrfLayerImpl::set_params(const CrfParams& p) {
  torch::NoGradGuard no_grad;
  for (int a = 0; a < kNumStages; ++a) {
    start[a].fill_(p.start[a]);
    for (int b = 0; b < kNumStages; ++b) transition[a][b].fill_(p.transition[a][b]);
  }
}

SequenceClassifierImpl::SequenceClassifierImpl(const ClassifierConfig& config) : config_(config) {
  config_.validate();
  std::int64_t emission_in = config_.input_dim;
  if (config_.uses_transformer()) {
    encoder = register_module("encoder", TransformerEncoder(config_.input_dim, config_.transformer));
    emission_in = config_.transformer.model_dim;
  }
  emission = register_module("emission", torch::nn::Linear(emission_in, kNumStages));
  if (config_.uses_crf()) crf = register_module("crf", CrfLayer());
}

torch::Tensor SequenceClassifierImpl::emissions(const torch::Tensor& z) {
  if (z.dim() != 3 || z.size(2) != config_.input_dim) {
    throw ShapeError("classifier expects [B, T, " + std::to_string(config_.input_dim) + "] input");
  }
  return emission(encoder ? encoder(z) : z);
}

torch::Tensor SequenceClassifierImpl::loss(const torch::Tensor& z, const torch::Tensor& stages) {
  const auto e = emissions(z);
  if (crf) return crf->nll(e, stages);
  if (stages.numel() > 0 && (stages.min().item<std::int64_t>() < 0 || stages.max().item<std::int64_t>() >= kNumStages)) {
    throw LabelError("stage index outside 0..4");
  }
  const auto value = torch::nn::functional::cross_entropy(e.reshape({-1, kNumStages}), stages.reshape({-1}));
  if (!std::isfinite(value.item<double>())) throw NumericalError("non-finite cross-entropy");
  return value;
}

EmissionMatrix to_emission_matrix(const torch::Tensor& emissions) {
  const auto e = emissions.detach().to(torch::kFloat64).contiguous();
  EmissionMatrix out(static_cast<std::size_t>(e.size(0)));
  const auto acc = e.accessor<double, 2>();
  for (std::int64_t i = 0; i < e.size(0); ++i) {
    for (int c = 0; c < kNumStages; ++c) out[i][c] = acc[i][c];
  }
  return out;
}

DecodedSequence decode_independent(const EmissionMatrix& emissions) {
  DecodedSequence out;
  for (const auto& row : emissions) {
    const double lse = log_sum_exp(row);
    StageScores p{};
    for (int c = 0; c < kNumStages; ++c) p[c] = std::exp(row[c] - lse);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    out.stages.push_back(stage_from_index(best));
    out.log_probability += row[best] - lse;
    out.uncertainties.push_back(entropy(p));
  }
  return out;
}

DecodedSequence SequenceClassifierImpl::decode(const torch::Tensor& z) {
  if (z.dim() != 2) throw ShapeError("decode expects a single [T, input_dim] sequence");
  const bool was_training = is_training();
  eval();
  torch::NoGradGuard no_grad;
  const auto e = to_emission_matrix(emissions(z.unsqueeze(0)).squeeze(0));
  train(was_training);
  if (!crf) return decode_independent(e);
  const auto params = crf->params();
  const auto best = viterbi_decode(e, params);
  return {best.stages, best.log_probability, uncertainty_scores(best.stages, e, params)};
}

}  // namespace hypnos::sequence
