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
#include <string>
#include <vector>

#include "hypnos/types.hpp"

namespace hypnos::eval {

// Rows are ground truth, columns are predictions.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumStages>, kNumStages> counts{};

  void add(SleepStage truth, SleepStage predicted, std::int64_t n = 1);
  void add(std::span<const SleepStage> truth, std::span<const SleepStage> predicted);
  std::int64_t total() const;
  std::int64_t trace() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

// Accuracy, MF1 and per-class F1 are percentages; kappa is unit scale.
struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double kappa = 0.0;
  std::array<double, kNumStages> per_class_f1{};
};

// Throws EmptyEvaluationError on an all-zero matrix. A class that is neither
// present nor predicted scores F1 = 0.
Metrics compute_metrics(const ConfusionMatrix& confusion);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population deviation across folds
};

MeanStd mean_std(std::span<const double> values);

// "83.91 ± 5.62"
std::string format_mean_std(const MeanStd& value, int decimals = 2);

// Predicts the most frequent training stage; ties go to the lower index.
class MajorityBaseline {
 public:
  // Throws EmptyDatasetError on an empty label set.
  static MajorityBaseline fit(std::span<const SleepStage> train_labels);
  SleepStage predict() const { return stage_; }
  std::vector<SleepStage> predict(std::size_t n) const { return std::vector<SleepStage>(n, stage_); }

 private:
  explicit MajorityBaseline(SleepStage s) : stage_(s) {}
  SleepStage stage_;
};

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  std::size_t dof = 0;
  bool degenerate = false;  // differences have zero variance
};

// Two-sided paired t-test on per-fold score differences a - b.
// Throws ConfigError on unequal lengths or n < 2.
TTestResult paired_t_test(std::span<const double> scores_a, std::span<const double> scores_b);

}  // namespace hypnos::eval
