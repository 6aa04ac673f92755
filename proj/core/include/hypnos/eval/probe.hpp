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

#include <cstdint>

#include <torch/torch.h>

namespace hypnos::eval {

struct ProbeResult {
  double train_accuracy = 0.0;  // percent
  double test_accuracy = 0.0;   // percent
};

// Multinomial logistic regression on standardized features, fit by L-BFGS
// on a seeded random train_fraction of the rows and scored on the rest.
ProbeResult linear_probe(const torch::Tensor& features, const torch::Tensor& labels, std::int64_t num_classes,
                         std::uint64_t seed, double train_fraction = 0.7, double l2 = 1e-3);

}  // namespace hypnos::eval
