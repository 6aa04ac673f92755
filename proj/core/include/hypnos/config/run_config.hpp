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
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hypnos/features/config.hpp"
#include "hypnos/sequence/config.hpp"
#include "hypnos/train/config.hpp"

namespace hypnos::config {

struct DataConfig {
  std::string manifest;
  std::string unlabeled_manifest;  // empty: purely supervised stage 1
  std::size_t sequence_length = 20;
  std::size_t stride = 0;  // 0 means stride == sequence_length
  std::size_t folds = 0;   // 0 means one fold per subject
  double val_fraction = 0.2;
  std::size_t max_folds = 0;  // run only the first n folds; 0 runs all
  std::size_t emd_max_samples = 100000;

  std::size_t effective_stride() const { return stride == 0 ? sequence_length : stride; }
};

// One experiment: every knob of ingestion-to-report in one document.
struct RunConfig {
  std::uint64_t seed = kDefaultSeed;
  std::string output_dir;
  std::string variant = "full";
  DataConfig data;
  features::FeatureNetConfig feature_net;
  sequence::ClassifierConfig classifier;
  train::TrainConfig train;
};

// Strict parse: unknown keys, missing required keys (seed, output_dir,
// data.manifest) and mistyped values raise ConfigError naming the key path.
RunConfig from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

// Environment overrides: HYPNOS_<SECTION>__<KEY>=value, e.g.
// HYPNOS_TRAIN__LEARNING_RATE=0.01 or HYPNOS_SEED=7. Values parse as JSON
// when possible, otherwise as strings.
inline constexpr const char* kEnvPrefix = "HYPNOS_";
void apply_environment(nlohmann::json& j, char** envp);

// Dotted-path override ("train.learning_rate", "0.01").
void apply_override(nlohmann::json& j, const std::string& dotted_key, const std::string& value);

// file -> environment -> explicit overrides, then strict parse.
RunConfig load_run_config(const std::filesystem::path& path, char** envp,
                          const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Applies a named variant ("full", "no_crf", "no_vae_losses", "no_scl",
// "no_augmentation", "logistic", "logistic_crf"). Throws ConfigError on an
// unknown name.
RunConfig apply_variant(RunConfig config, const std::string& variant);

// The ablation grid derived from a base configuration.
std::vector<std::pair<std::string, RunConfig>> ablation_variants(const RunConfig& base);

}  // namespace hypnos::config
