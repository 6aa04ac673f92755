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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hypnos/error.hpp"
#include "oracles.hpp"

namespace hypnos::sequence {
namespace {

EmissionMatrix random_emissions(std::size_t t, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.5);
  EmissionMatrix e(t);
  for (auto& row : e) {
    for (auto& v : row) v = normal(rng);
  }
  return e;
}

CrfParams random_params(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.5);
  CrfParams p;
  for (auto& v : p.start) v = normal(rng);
  for (auto& row : p.transition) {
    for (auto& v : row) v = normal(rng);
  }
  return p;
}

TEST(Crf, ViterbiAndPartitionMatchEnumeration) {
  std::mt19937_64 rng(1);
  for (std::size_t t = 1; t <= 5; ++t) {
    for (int draw = 0; draw < 20; ++draw) {
      const auto e = random_emissions(t, rng);
      const auto p = random_params(rng);
      const auto truth = testing::enumerate_crf(e, p);
      const auto v = viterbi_decode(e, p);
      EXPECT_EQ(v.stages, truth.argmax);
      EXPECT_NEAR(crf_log_partition(e, p), truth.log_partition, 1e-9);
      EXPECT_NEAR(v.log_probability, truth.best_score - truth.log_partition, 1e-9);
    }
  }
}

TEST(Crf, ScoreMatchesDirectSum) {
  std::mt19937_64 rng(2);
  const auto e = random_emissions(4, rng);
  const auto p = random_params(rng);
  const std::vector<SleepStage> path = {SleepStage::kN2, SleepStage::kN2, SleepStage::kRem, SleepStage::kW};
  const double expected = p.start[2] + e[0][2] + p.transition[2][2] + e[1][2] + p.transition[2][4] + e[2][4] +
                          p.transition[4][0] + e[3][0];
  EXPECT_NEAR(crf_log_score(path, e, p), expected, 1e-12);
}

TEST(Crf, NllIsNonNegativeAndExponentiatesToAProbability) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> stage(0, 4);
  for (int i = 0; i < 50; ++i) {
    const auto e = random_emissions(6, rng);
    const auto p = random_params(rng);
    std::vector<SleepStage> path(6);
    for (auto& s : path) s = static_cast<SleepStage>(stage(rng));
    const double nll = crf_nll(path, e, p);
    EXPECT_GE(nll, -1e-12);
    EXPECT_NEAR(nll, crf_log_partition(e, p) - testing::path_score(path, e, p), 1e-9);
  }
}

TEST(Crf, ProbabilitiesOverAllPathsSumToOne) {
  std::mt19937_64 rng(4);
  const auto e = random_emissions(3, rng);
  const auto p = random_params(rng);
  double total = 0.0;
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      for (int c = 0; c < 5; ++c) {
        const std::vector<SleepStage> path = {static_cast<SleepStage>(a), static_cast<SleepStage>(b),
                                              static_cast<SleepStage>(c)};
        total += std::exp(-crf_nll(path, e, p));
      }
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Crf, TiesResolveTowardLowestStage) {
  EmissionMatrix e(3);
  for (auto& row : e) row.fill(0.0);
  const auto v = viterbi_decode(e, CrfParams{});
  EXPECT_EQ(v.stages, std::vector<SleepStage>(3, SleepStage::kW));
}

TEST(Crf, StableUnderHugePotentials) {
  EmissionMatrix e(4);
  for (auto& row : e) row = {1e4, -1e4, 5e3, 0.0, 1e4 - 1.0};
  const double z = crf_log_partition(e, CrfParams{});
  EXPECT_TRUE(std::isfinite(z));
  EXPECT_NEAR(z, 4e4 + 4.0 * std::log1p(std::exp(-1.0)), 1e-6);
}

TEST(Crf, EmptySequence) {
  EXPECT_THROW(viterbi_decode({}, CrfParams{}), ShapeError);
  // A single empty path with score zero.
  EXPECT_EQ(crf_log_partition({}, CrfParams{}), 0.0);
}

TEST(Crf, MismatchedPathIsRejected) {
  EmissionMatrix e(3);
  const std::vector<SleepStage> path(2, SleepStage::kW);
  EXPECT_THROW(crf_log_score(path, e, CrfParams{}), ShapeError);
}

TEST(Uncertainty, LocalDistributionIsNormalized) {
  std::mt19937_64 rng(5);
  const auto e = random_emissions(1, rng);
  const auto p = random_params(rng);
  for (int prev = -1; prev < 5; ++prev) {
    const SleepStage s = static_cast<SleepStage>(prev < 0 ? 0 : prev);
    const auto dist = local_distribution(prev < 0 ? nullptr : &s, e[0], p);
    double sum = 0.0;
    for (double q : dist) {
      EXPECT_GE(q, 0.0);
      sum += q;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Uncertainty, MatchesEntropyOfLocalPotentials) {
  std::mt19937_64 rng(6);
  const auto e = random_emissions(7, rng);
  const auto p = random_params(rng);
  const auto path = viterbi_decode(e, p).stages;
  const auto u = uncertainty_scores(path, e, p);
  ASSERT_EQ(u.size(), path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    std::array<double, kNumStages> scores{};
    for (int j = 0; j < kNumStages; ++j) {
      scores[j] = e[i][j] + (i == 0 ? p.start[j] : p.transition[stage_index(path[i - 1])][j]);
    }
    EXPECT_NEAR(u[i], testing::reference_entropy(scores), 1e-12) << "position " << i;
  }
}

TEST(Uncertainty, BoundsAndExtremes) {
  EXPECT_NEAR(entropy({0.2, 0.2, 0.2, 0.2, 0.2}), std::log(5.0), 1e-15);
  EXPECT_EQ(entropy({1.0, 0.0, 0.0, 0.0, 0.0}), 0.0);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto e = random_emissions(5, rng);
    const auto p = random_params(rng);
    for (double u : uncertainty_scores(viterbi_decode(e, p).stages, e, p)) {
      EXPECT_GE(u, 0.0);
      EXPECT_LE(u, std::log(5.0));
    }
  }
}

TEST(LogSumExp, HandlesNegativeInfinity) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> all_inf = {-inf, -inf};
  EXPECT_EQ(log_sum_exp(all_inf), -inf);
  const std::vector<double> mixed = {-inf, 0.0, std::log(3.0)};
  EXPECT_NEAR(log_sum_exp(mixed), std::log(4.0), 1e-15);
}

}  // namespace
}  // namespace hypnos::sequence
