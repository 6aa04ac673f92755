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

#include "hypnos/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "hypnos/error.hpp"

namespace hypnos::eval {

void ConfusionMatrix::add(SleepStage truth, SleepStage predicted, std::int64_t n) {
  counts[stage_index(truth)][stage_index(predicted)] += n;
}

void ConfusionMatrix::add(std::span<const SleepStage> truth, std::span<const SleepStage> predicted) {
  if (truth.size() != predicted.size()) throw ShapeError("truth and prediction lengths differ");
  for (std::size_t i = 0; i < truth.size(); ++i) add(truth[i], predicted[i]);
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) {
    for (auto v : row) t += v;
  }
  return t;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (int i = 0; i < kNumStages; ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (int i = 0; i < kNumStages; ++i) {
    for (int j = 0; j < kNumStages; ++j) counts[i][j] += other.counts[i][j];
  }
  return *this;
}

Metrics compute_metrics(const ConfusionMatrix& confusion) {
  const std::int64_t total = confusion.total();
  if (total <= 0) throw EmptyEvaluationError("confusion matrix is empty");
  std::array<std::int64_t, kNumStages> row{};
  std::array<std::int64_t, kNumStages> col{};
  for (int i = 0; i < kNumStages; ++i) {
    for (int j = 0; j < kNumStages; ++j) {
      row[i] += confusion.counts[i][j];
      col[j] += confusion.counts[i][j];
    }
  }
  const std::int64_t agree = confusion.trace();

  Metrics m;
  m.accuracy = 100.0 * static_cast<double>(agree) / static_cast<double>(total);

  // kappa = (N * agree - sum r_i c_i) / (N^2 - sum r_i c_i), integer numerator
  // and denominator so the only rounding is the final division.
  __int128 chance = 0;
  for (int i = 0; i < kNumStages; ++i) chance += static_cast<__int128>(row[i]) * col[i];
  const __int128 n2 = static_cast<__int128>(total) * total;
  const __int128 num = static_cast<__int128>(total) * agree - chance;
  const __int128 den = n2 - chance;
  m.kappa = den == 0 ? (num == 0 ? 1.0 : 0.0)
                     : static_cast<double>(static_cast<long double>(num)) /
                           static_cast<double>(static_cast<long double>(den));
  // With den == 0 every rating sits in one class on both sides: perfect
  // agreement, reported as 1.

  double f1_sum = 0.0;
  for (int c = 0; c < kNumStages; ++c) {
    const std::int64_t tp = confusion.counts[c][c];
    const std::int64_t denom = row[c] + col[c];  // 2TP + FP + FN
    m.per_class_f1[c] = denom == 0 ? 0.0 : 100.0 * static_cast<double>(2 * tp) / static_cast<double>(denom);
    f1_sum += m.per_class_f1[c];
  }
  m.macro_f1 = f1_sum / kNumStages;
  return m;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(values.size()));
  return out;
}

std::string format_mean_std(const MeanStd& value, int decimals) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.*f \xC2\xB1 %.*f", decimals, value.mean, decimals, value.std);
  return buf;
}

MajorityBaseline MajorityBaseline::fit(std::span<const SleepStage> train_labels) {
  if (train_labels.empty()) throw EmptyDatasetError("majority baseline needs training labels");
  std::array<std::size_t, kNumStages> counts{};
  for (SleepStage s : train_labels) ++counts[stage_index(s)];
  int best = 0;
  for (int c = 1; c < kNumStages; ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return MajorityBaseline(static_cast<SleepStage>(best));
}

TTestResult paired_t_test(std::span<const double> scores_a, std::span<const double> scores_b) {
  if (scores_a.size() != scores_b.size()) throw ConfigError("paired t-test needs equal-length inputs");
  const std::size_t n = scores_a.size();
  if (n < 2) throw ConfigError("paired t-test needs at least two pairs");
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = scores_a[i] - scores_b[i];
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult r;
  r.dof = n - 1;
  if (sd == 0.0) {
    r.degenerate = true;
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
      r.p = 0.0;
    }
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(r.dof));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace hypnos::eval
