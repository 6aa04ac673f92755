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

#include <json.hpp>
#include <torch/torch.h>

namespace hypnos::train {

using TensorMap = std::map<std::string, torch::Tensor>;

// A checkpoint directory holds manifest.json plus one raw little-endian
// float32 blob per tensor under tensors/.
struct Checkpoint {
  std::string id;         // content hash, assigned on save
  std::string stage;      // "feature" | "classifier" | "*-state"
  std::string parent_id;  // classifier checkpoints name their feature checkpoint
  nlohmann::json config = nlohmann::json::object();
  int epoch = 0;
  nlohmann::json history = nlohmann::json::array();
  nlohmann::json extra = nlohmann::json::object();
  TensorMap tensors;
};

// Parameters and buffers by dotted name, detached.
TensorMap module_state(const torch::nn::Module& module, const std::string& prefix = {});

// Copies tensors named prefix + <name> into the module. With strict set,
// every parameter and buffer must be present with a matching shape.
// Throws CheckpointError otherwise. Without it, absent or misshapen tensors
// are skipped.
void load_module_state(torch::nn::Module& module, const TensorMap& tensors, const std::string& prefix = {},
                       bool strict = true);

// Order-independent digest of every tensor's name, shape and bytes.
std::string tensor_digest(const TensorMap& tensors);
std::string module_digest(const torch::nn::Module& module);

// Content id over tensors, stage, parent and config.
std::string checkpoint_id(const Checkpoint& checkpoint);

// Writes to a temporary sibling and renames, so a crash never leaves a
// half-written checkpoint under dir. Returns the assigned id.
std::string save_checkpoint(const std::filesystem::path& dir, Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// Adam moments and step counts, keyed like module_state with an "optim."
// prefix so they can travel inside a Checkpoint.
TensorMap adam_state(torch::optim::Adam& optimizer, const torch::nn::Module& module);
void load_adam_state(torch::optim::Adam& optimizer, const torch::nn::Module& module, const TensorMap& tensors);

}  // namespace hypnos::train
