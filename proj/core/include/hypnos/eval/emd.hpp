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

#include <span>
#include <vector>

namespace hypnos::eval {

// Wasserstein-1 distance between the empirical distributions of two sample
// sets: the integral of |F^-1(u) - G^-1(u)| over u in [0, 1].
// Throws EmptyDatasetError when either set is empty.
double wasserstein1(std::span<const double> a, std::span<const double> b);
double wasserstein1(std::span<const float> a, std::span<const float> b);

// Evenly strided subsample of at most max_points values, deterministic.
std::vector<float> subsample(std::span<const float> values, std::size_t max_points);

// Mean W1 distance from one test subject to each training subject, after
// subsampling each set to at most max_points values.
double emd_subject_distance(std::span<const float> test_subject,
                            const std::vector<std::span<const float>>& train_subjects,
                            std::size_t max_points = 100000);

}  // namespace hypnos::eval
