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
#include <vector>

#include <torch/torch.h>

#include "hypnos/types.hpp"

namespace hypnos::train {

// Training subjects in sorted order; position is the classifier index.
class SubjectVocabulary {
 public:
  SubjectVocabulary() = default;
  explicit SubjectVocabulary(std::vector<std::string> ids);

  const std::vector<std::string>& ids() const { return ids_; }
  std::int64_t size() const { return static_cast<std::int64_t>(ids_.size()); }
  std::int64_t index(const std::string& id) const;  // -1 when absent

 private:
  std::vector<std::string> ids_;
};

// Stacked epochs: x [M, N] float32; stages and subjects [M] int64 with -1
// for unlabeled rows and subjects outside the vocabulary.
struct EpochData {
  torch::Tensor x;
  torch::Tensor stages;
  torch::Tensor subjects;

  std::int64_t size() const { return x.defined() ? x.size(0) : 0; }
  std::int64_t epoch_length() const { return x.defined() ? x.size(1) : 0; }
};

// With labeled_only set, unlabeled rows are skipped. Throws ShapeError when
// tables disagree on the sampling rate.
EpochData stack_epochs(const std::vector<EpochTable>& tables, const SubjectVocabulary& vocabulary,
                       bool labeled_only);

// Sequences of frozen representations: z [S, T, L], stages [S, T].
struct SequenceSet {
  torch::Tensor z;
  torch::Tensor stages;
  std::vector<EpochSequence> sequences;

  std::int64_t size() const { return z.defined() ? z.size(0) : 0; }
};

}  // namespace hypnos::train
