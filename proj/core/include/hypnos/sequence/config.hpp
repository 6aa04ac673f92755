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
#include <string>
#include <string_view>

namespace hypnos::sequence {

struct TransformerConfig {
  std::int64_t layers = 4;
  std::int64_t heads = 8;
  std::int64_t model_dim = 128;
  std::int64_t feed_forward_dim = 512;
  double dropout = 0.1;
  bool positional_encoding = true;

  void validate() const;  // model_dim must be divisible by heads
};

enum class HeadKind {
  kTransformerCrf,     // full classification network
  kTransformerLinear,  // no CRF: per-position softmax
  kLogisticCrf,        // linear emissions straight into the CRF
  kLogistic,           // per-position multinomial logistic regression
};

std::string_view head_kind_name(HeadKind kind);
HeadKind parse_head_kind(std::string_view name);  // throws ConfigError

struct ClassifierConfig {
  HeadKind head = HeadKind::kTransformerCrf;
  std::int64_t input_dim = 128;  // sleep-latent size from the feature net
  TransformerConfig transformer;

  bool uses_transformer() const;
  bool uses_crf() const;
  void validate() const;
};

}  // namespace hypnos::sequence
