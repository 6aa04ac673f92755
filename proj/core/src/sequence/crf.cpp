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

#include "hypnos/sequence/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hypnos/error.hpp"

namespace hypnos::sequence {
namespace {

void check_shapes(std::span<const SleepStage> stages, const EmissionMatrix& emissions) {
  if (stages.size() != emissions.size()) {
    throw ShapeError("stage path has " + std::to_string(stages.size()) + " positions, emissions " +
                     std::to_string(emissions.size()));
  }
  for (SleepStage s : stages) {
    if (stage_index(s) < 0 || stage_index(s) >= kNumStages) throw LabelError("stage index outside 0..4");
  }
}

}  // namespace

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

double crf_log_score(std::span<const SleepStage> stages, const EmissionMatrix& emissions,
                     const CrfParams& params) {
  check_shapes(stages, emissions);
  double score = 0.0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const int cur = stage_index(stages[i]);
    score += i == 0 ? params.start[cur] : params.transition[stage_index(stages[i - 1])][cur];
    score += emissions[i][cur];
  }
  return score;
}

double crf_log_partition(const EmissionMatrix& emissions, const CrfParams& params) {
  if (emissions.empty()) return 0.0;
  StageScores alpha;
  for (int c = 0; c < kNumStages; ++c) alpha[c] = params.start[c] + emissions[0][c];
  std::array<double, kNumStages> terms;
  for (std::size_t i = 1; i < emissions.size(); ++i) {
    StageScores next;
    for (int c = 0; c < kNumStages; ++c) {
      for (int p = 0; p < kNumStages; ++p) terms[p] = alpha[p] + params.transition[p][c];
      next[c] = log_sum_exp(terms) + emissions[i][c];
    }
    alpha = next;
  }
  return log_sum_exp(alpha);
}

double crf_nll(std::span<const SleepStage> stages, const EmissionMatrix& emissions,
               const CrfParams& params) {
  const double nll = crf_log_partition(emissions, params) - crf_log_score(stages, emissions, params);
  if (!std::isfinite(nll)) throw NumericalError("CRF negative log-likelihood is not finite");
  return nll;
}

ViterbiResult viterbi_decode(const EmissionMatrix& emissions, const CrfParams& params) {
  if (emissions.empty()) throw ShapeError("cannot decode an empty sequence");
  const std::size_t t_len = emissions.size();
  std::vector<std::array<int, kNumStages>> back(t_len);
  StageScores best;
  for (int c = 0; c < kNumStages; ++c) best[c] = params.start[c] + emissions[0][c];
  for (std::size_t i = 1; i < t_len; ++i) {
    StageScores next;
    for (int c = 0; c < kNumStages; ++c) {
      int arg = 0;
      double val = best[0] + params.transition[0][c];
      for (int p = 1; p < kNumStages; ++p) {
        const double v = best[p] + params.transition[p][c];
        if (v > val) {  // strict: earlier (lower) index wins ties
          val = v;
          arg = p;
        }
      }
      next[c] = val + emissions[i][c];
      back[i][c] = arg;
    }
    best = next;
  }
  int last = 0;
  for (int c = 1; c < kNumStages; ++c) {
    if (best[c] > best[last]) last = c;
  }
  ViterbiResult out;
  out.stages.resize(t_len);
  int cur = last;
  for (std::size_t i = t_len; i-- > 0;) {
    out.stages[i] = static_cast<SleepStage>(cur);
    if (i > 0) cur = back[i][cur];
  }
  out.log_probability = best[last] - crf_log_partition(emissions, params);
  return out;
}

StageScores local_distribution(const SleepStage* previous, const StageScores& emission,
                               const CrfParams& params) {
  StageScores logits;
  for (int c = 0; c < kNumStages; ++c) {
    logits[c] = (previous ? params.transition[stage_index(*previous)][c] : params.start[c]) + emission[c];
  }
  const double z = log_sum_exp(logits);
  StageScores p;
  for (int c = 0; c < kNumStages; ++c) p[c] = std::exp(logits[c] - z);
  return p;
}

double entropy(const StageScores& probabilities) {
  double h = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::clamp(h, 0.0, std::log(static_cast<double>(kNumStages)));
}

std::vector<double> uncertainty_scores(std::span<const SleepStage> decoded,
                                       const EmissionMatrix& emissions, const CrfParams& params) {
  check_shapes(decoded, emissions);
  std::vector<double> out;
  out.reserve(decoded.size());
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    const SleepStage* prev = i == 0 ? nullptr : &decoded[i - 1];
    out.push_back(entropy(local_distribution(prev, emissions[i], params)));
  }
  return out;
}

}  // namespace hypnos::sequence
