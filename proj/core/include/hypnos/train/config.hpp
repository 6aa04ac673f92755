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
#include <vector>

#include "hypnos/augment/augmentation.hpp"
#include "hypnos/features/config.hpp"
#include "hypnos/random.hpp"

namespace hypnos::train {

// Component toggles used by ablation runs.
struct Ablation {
  bool no_vae_losses = false;  // drop -L_VAE and both latent classifiers
  bool no_scl = false;         // drop supervised contrastive term on z_y
  bool no_augmentation = false;
};

struct TrainConfig {
  std::int64_t batch_size = 64;  // source epochs (stage 1) or sequences (stage 2)
  double learning_rate = 1e-3;
  int feature_epochs = 100;
  int classifier_epochs = 100;
  int patience = 10;  // epochs without validation improvement; 0 disables
  double clip_norm = 5.0;
  std::uint64_t seed = kDefaultSeed;
  features::FeatureLossWeights weights;
  augment::AugmentationConfig augmentation;
  Ablation ablation;
  // Training-log destination (one JSON object per epoch); empty disables.
  std::string log_path;

  void validate() const;  // batch_size >= 2, learning_rate > 0, ...
};

}  // namespace hypnos::train
