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

#include <filesystem>
#include <string>
#include <vector>

#include "hypnos/ingest/manifest.hpp"
#include "hypnos/ingest/segment.hpp"

namespace hypnos::ingest {

enum class DatasetKind { kSleepEdf, kShhs };

DatasetKind parse_dataset_kind(const std::string& name);  // "sleepedf" | "shhs"
const char* dataset_kind_name(DatasetKind kind);

// One night: the signal file and the file carrying its hypnogram.
struct RecordingPair {
  std::string subject_id;
  std::filesystem::path signal;
  std::filesystem::path annotations;
};

// SleepEDF: "SC4ssNE0-PSG.edf" pairs with "SC4ssN??-Hypnogram.edf" on the
// first seven characters; both nights of a subject share the id "SC4ss".
// SHHS: "<stem>.edf" pairs with "<stem>-nsrr.xml" anywhere under raw_dir.
// Sorted by (subject, signal path). Unpaired signal files are skipped.
std::vector<RecordingPair> discover_recordings(const std::filesystem::path& raw_dir, DatasetKind kind);

std::vector<RawAnnotation> read_sleepedf_hypnogram(const std::filesystem::path& path);
std::vector<RawAnnotation> parse_nsrr_xml(const std::string& text);
std::vector<RawAnnotation> read_nsrr_xml(const std::filesystem::path& path);

struct IngestOptions {
  DatasetKind kind = DatasetKind::kSleepEdf;
  std::string channel;
  SegmentOptions segment;
  bool strip_labels = false;  // write an unlabeled dataset
};

struct IngestFailure {
  std::filesystem::path path;
  std::string message;
};

struct IngestResult {
  DatasetManifest manifest;
  DatasetStats stats;
  std::vector<IngestFailure> failures;
};

// Segments every discovered night into canonical per-subject files under
// out_dir and writes the manifest to manifest_path. Nights of one subject
// are concatenated with disjoint epoch-index ranges so that sequences never
// straddle them. Throws EmptyDatasetError when nothing is found, and the
// first failure when every recording fails.
IngestResult ingest_directory(const std::filesystem::path& raw_dir, const std::filesystem::path& out_dir,
                              const std::filesystem::path& manifest_path, const IngestOptions& options);

// Folds stored in the manifest when present, otherwise kfold_split with k
// (0 meaning one fold per subject).
std::vector<FoldSplit> manifest_folds(const DatasetManifest& manifest, std::size_t k, double val_fraction,
                                      std::uint64_t seed);

}  // namespace hypnos::ingest
