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
#include <cstdint>
#include <span>
#include <vector>

#include "hypnos/sequence/crf.hpp"

// Reference implementations used only by tests. Each one takes the slow,
// obvious route so it shares no code path with the library.
namespace hypnos::testing {

struct EnumeratedCrf {
  std::vector<SleepStage> argmax;
  double best_score = 0.0;
  double log_partition = 0.0;
};

// Scores all 5^T stage paths one by one.
EnumeratedCrf enumerate_crf(const sequence::EmissionMatrix& emissions, const sequence::CrfParams& params);

// Score of one path from the raw potentials.
double path_score(std::span<const SleepStage> path, const sequence::EmissionMatrix& emissions,
                  const sequence::CrfParams& params);

using Counts = std::array<std::array<std::int64_t, kNumStages>, kNumStages>;

struct ReferenceMetrics {
  double accuracy = 0.0;  // percent
  double kappa = 0.0;
  double macro_f1 = 0.0;  // percent
  std::array<double, kNumStages> per_class_f1{};
};

// Accuracy and kappa are evaluated as exact fractions and rounded once;
// F1 goes through precision and recall.
ReferenceMetrics reference_metrics(const Counts& counts);

// Optimal transport cost between two uniform empirical distributions,
// solved as an integral min-cost flow on the complete bipartite graph.
double transport_lp(std::span<const double> a, std::span<const double> b);

// Entropy of softmax(scores) with p log p summed in long double.
double reference_entropy(const std::array<double, kNumStages>& scores);

}  // namespace hypnos::testing
