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

#include "hypnos/eval/emd.hpp"

#include <algorithm>
#include <cmath>

#include "hypnos/error.hpp"

namespace hypnos::eval {
namespace {

double sorted_w1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // Walk the merged quantile breakpoints i/n and j/m using integer
  // cross-multiplied positions (i*m vs j*n over a common denominator n*m).
  std::size_t i = 0;
  std::size_t j = 0;
  long double acc = 0.0L;
  std::size_t prev = 0;  // position in units of 1/(n*m)
  while (i < n && j < m) {
    const std::size_t next_a = (i + 1) * m;
    const std::size_t next_b = (j + 1) * n;
    const std::size_t next = std::min(next_a, next_b);
    acc += static_cast<long double>(next - prev) * std::abs(static_cast<long double>(a[i]) - b[j]);
    prev = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return static_cast<double>(acc / (static_cast<long double>(n) * static_cast<long double>(m)));
}

}  // namespace

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptyDatasetError("EMD needs two non-empty sample sets");
  return sorted_w1(std::vector<double>(a.begin(), a.end()), std::vector<double>(b.begin(), b.end()));
}

double wasserstein1(std::span<const float> a, std::span<const float> b) {
  if (a.empty() || b.empty()) throw EmptyDatasetError("EMD needs two non-empty sample sets");
  return sorted_w1(std::vector<double>(a.begin(), a.end()), std::vector<double>(b.begin(), b.end()));
}

std::vector<float> subsample(std::span<const float> values, std::size_t max_points) {
  if (max_points == 0 || values.size() <= max_points) return {values.begin(), values.end()};
  std::vector<float> out;
  out.reserve(max_points);
  for (std::size_t k = 0; k < max_points; ++k) {
    out.push_back(values[k * values.size() / max_points]);
  }
  return out;
}

double emd_subject_distance(std::span<const float> test_subject,
                            const std::vector<std::span<const float>>& train_subjects,
                            std::size_t max_points) {
  if (test_subject.empty() || train_subjects.empty()) {
    throw EmptyDatasetError("EMD subject distance needs samples on both sides");
  }
  const auto test = subsample(test_subject, max_points);
  double sum = 0.0;
  for (const auto& train : train_subjects) {
    const auto t = subsample(train, max_points);
    sum += wasserstein1(std::span<const float>(test), std::span<const float>(t));
  }
  return sum / static_cast<double>(train_subjects.size());
}

}  // namespace hypnos::eval
