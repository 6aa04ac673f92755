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
#include <vector>

namespace hypnos::features {

// Bottleneck residual encoder over 1-D signals. blocks = {3, 4, 6, 3} with
// base_width 64 is the full-size layout; tests shrink base_width and blocks.
struct EncoderConfig {
  std::int64_t base_width = 64;
  std::vector<std::int64_t> blocks = {3, 4, 6, 3};
  std::int64_t expansion = 4;
};

struct FeatureNetConfig {
  int sampling_rate_hz = 100;
  std::int64_t num_subjects = 1;  // training-subject vocabulary size
  std::int64_t latent_dim_subject = 128;
  std::int64_t latent_dim_sleep = 128;
  EncoderConfig encoder;
  std::int64_t decoder_hidden = 256;
  std::int64_t decoder_channels = 64;
  std::int64_t prior_hidden = 128;
  std::int64_t projection_hidden = 128;
  std::int64_t projection_dim = 128;

  std::int64_t epoch_length() const { return 30 * static_cast<std::int64_t>(sampling_rate_hz); }
  // Stem kernel grows with the sampling rate (about a quarter second).
  std::int64_t stem_kernel() const;
  // Throws ConfigError on non-positive sizes.
  void validate() const;
};

// Relative weights of the labeled feature objective; rho is the contrastive
// temperature.
struct FeatureLossWeights {
  double alpha_d = 10500.0;
  double alpha_y = 3500.0;
  double beta = 1.0;
  double gamma_d = 20000.0;
  double gamma_y = 20000.0;
  double rho = 0.5;

  void validate() const;
};

}  // namespace hypnos::features
