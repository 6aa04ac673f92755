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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hypnos/types.hpp"

namespace hypnos::ingest {

struct SubjectEntry {
  std::string id;
  std::filesystem::path canonical;  // relative to the manifest directory
  std::vector<std::string> recordings;
  std::size_t epochs = 0;
};

// JSON document listing the canonical subject files of one dataset.
struct DatasetManifest {
  std::string dataset_kind;
  std::string channel;
  int sampling_rate_hz = 0;
  std::vector<SubjectEntry> subjects;
  // Optional precomputed fold assignment: each subject in exactly one fold.
  std::vector<std::vector<std::string>> folds;
  std::filesystem::path base_dir;  // directory the manifest was loaded from

  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  // Throws ConfigError when subject ids repeat or folds do not partition them.
  void validate() const;

  std::vector<std::string> subject_ids() const;
  const SubjectEntry& subject(const std::string& id) const;
  EpochTable load_subject(const std::string& id) const;
};

struct FoldSplit {
  std::size_t fold = 0;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

// Subject-disjoint k-fold split. Test folds are consecutive blocks of the
// given order (sizes differ by at most one); round(val_fraction * n) of the
// remaining subjects are drawn for validation with a seeded shuffle.
// Throws ConfigError when k exceeds the subject count or nothing is left to train on.
std::vector<FoldSplit> kfold_split(const std::vector<std::string>& subjects, std::size_t k,
                                   double val_fraction, std::uint64_t seed);

struct DatasetStats {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t total_epochs = 0;
  std::size_t unlabeled_epochs = 0;
  std::array<std::size_t, kNumStages> stage_counts{};
};

// Throws EmptyDatasetError when there is no epoch.
DatasetStats dataset_stats(const std::vector<EpochTable>& tables);
DatasetStats dataset_stats(const std::vector<LabeledEpoch>& epochs);

}  // namespace hypnos::ingest
