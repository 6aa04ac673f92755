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

#include <array>
#include <span>
#include <vector>

#include "hypnos/types.hpp"

namespace hypnos::sequence {

using StageScores = std::array<double, kNumStages>;
// One row of per-stage emission scores per sequence position.
using EmissionMatrix = std::vector<StageScores>;

// Log-potentials of a linear-chain CRF over the five stages:
//   log S(prev, next, Z)_i = transition[prev][next] + emission_i[next]
// with `start` standing in for the transition into position 0.
struct CrfParams {
  StageScores start{};
  std::array<StageScores, kNumStages> transition{};
};

// Unnormalized log score of a stage path.
double crf_log_score(std::span<const SleepStage> stages, const EmissionMatrix& emissions,
                     const CrfParams& params);

// log of the sum over all 5^T paths of exp(score), by the forward recursion.
double crf_log_partition(const EmissionMatrix& emissions, const CrfParams& params);

// Negative conditional log-likelihood; never negative up to rounding.
// Throws NumericalError when the result is not finite.
double crf_nll(std::span<const SleepStage> stages, const EmissionMatrix& emissions,
               const CrfParams& params);

struct ViterbiResult {
  std::vector<SleepStage> stages;
  double log_probability = 0.0;  // score(stages) - log partition
};

// Exact argmax path. Ties resolve toward the lowest stage index, both in the
// recursion and in the final state.
ViterbiResult viterbi_decode(const EmissionMatrix& emissions, const CrfParams& params);

// Distribution over the next stage given the previous one (or the start
// state when `previous` is null), normalizing the local potentials.
StageScores local_distribution(const SleepStage* previous, const StageScores& emission,
                               const CrfParams& params);

// Natural-log entropy of a discrete distribution; zero-probability terms
// contribute nothing.
double entropy(const StageScores& probabilities);

// Per-position uncertainty of a decoded path: entropy of the locally
// normalized potential conditioned on the previous decoded stage.
std::vector<double> uncertainty_scores(std::span<const SleepStage> decoded,
                                       const EmissionMatrix& emissions, const CrfParams& params);

double log_sum_exp(std::span<const double> values);

}  // namespace hypnos::sequence
