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

#include "hypnos/ingest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "hypnos/error.hpp"
#include "hypnos/ingest/canonical.hpp"
#include "hypnos/ingest/edf.hpp"
#include "hypnos/random.hpp"

namespace hypnos::ingest {

namespace fs = std::filesystem;

namespace {

// Offset between the epoch indices of successive nights of one subject.
constexpr std::int64_t kNightStride = 1'000'000;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<fs::path> list_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("raw directory " + dir.string() + " does not exist");
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string tag_text(const std::string& block, const std::string& tag) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  const auto a = block.find(open);
  if (a == std::string::npos) return {};
  const auto b = block.find(close, a);
  if (b == std::string::npos) return {};
  return block.substr(a + open.size(), b - a - open.size());
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "sleepedf") return DatasetKind::kSleepEdf;
  if (name == "shhs") return DatasetKind::kShhs;
  throw ConfigError("unknown dataset kind '" + name + "' (expected sleepedf or shhs)");
}

const char* dataset_kind_name(DatasetKind kind) {
  return kind == DatasetKind::kSleepEdf ? "sleepedf" : "shhs";
}

std::vector<RecordingPair> discover_recordings(const fs::path& raw_dir, DatasetKind kind) {
  const auto files = list_files(raw_dir);
  std::vector<RecordingPair> out;
  if (kind == DatasetKind::kSleepEdf) {
    std::map<std::string, fs::path> hypnograms;
    for (const auto& f : files) {
      const std::string name = f.filename().string();
      if (ends_with(name, "-Hypnogram.edf") && name.size() >= 7) hypnograms.emplace(name.substr(0, 7), f);
    }
    for (const auto& f : files) {
      const std::string name = f.filename().string();
      if (!ends_with(name, "-PSG.edf") || name.size() < 7) continue;
      const auto it = hypnograms.find(name.substr(0, 7));
      if (it == hypnograms.end()) continue;
      out.push_back({name.substr(0, 5), f, it->second});
    }
  } else {
    std::map<std::string, fs::path> xmls;
    for (const auto& f : files) {
      const std::string name = f.filename().string();
      if (ends_with(name, "-nsrr.xml")) xmls.emplace(name.substr(0, name.size() - 9), f);
    }
    for (const auto& f : files) {
      if (f.extension() != ".edf") continue;
      const auto it = xmls.find(f.stem().string());
      if (it == xmls.end()) continue;
      out.push_back({f.stem().string(), f, it->second});
    }
  }
  std::sort(out.begin(), out.end(), [](const RecordingPair& a, const RecordingPair& b) {
    return std::tie(a.subject_id, a.signal) < std::tie(b.subject_id, b.signal);
  });
  return out;
}

std::vector<RawAnnotation> read_sleepedf_hypnogram(const fs::path& path) {
  const EdfFile file = EdfFile::open(path);
  std::vector<RawAnnotation> out;
  for (const auto& a : read_annotations(file)) {
    const auto stage = parse_sleepedf_label(a.text);
    if (!stage) continue;  // lights-off markers and the like
    out.push_back({a.onset_s, a.duration_s, *stage});
  }
  return out;
}

std::vector<RawAnnotation> parse_nsrr_xml(const std::string& text) {
  std::vector<RawAnnotation> out;
  std::size_t pos = 0;
  while (true) {
    const auto a = text.find("<ScoredEvent>", pos);
    if (a == std::string::npos) break;
    const auto b = text.find("</ScoredEvent>", a);
    if (b == std::string::npos) throw ParseError("unterminated <ScoredEvent> element");
    const std::string block = text.substr(a, b - a);
    pos = b;
    const std::string type = trim(tag_text(block, "EventType"));
    if (type.rfind("Stages", 0) != 0) continue;
    const auto stage = parse_nsrr_concept(trim(tag_text(block, "EventConcept")));
    if (!stage) continue;
    try {
      out.push_back({std::stod(trim(tag_text(block, "Start"))), std::stod(trim(tag_text(block, "Duration"))),
                     *stage});
    } catch (const std::exception&) {
      throw ParseError("stage event without numeric Start/Duration");
    }
  }
  return out;
}

std::vector<RawAnnotation> read_nsrr_xml(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_nsrr_xml(buffer.str());
}

IngestResult ingest_directory(const fs::path& raw_dir, const fs::path& out_dir, const fs::path& manifest_path,
                              const IngestOptions& options) {
  const auto pairs = discover_recordings(raw_dir, options.kind);
  if (pairs.empty()) throw EmptyDatasetError("no recordings found in " + raw_dir.string());

  IngestResult result;
  std::map<std::string, EpochTable> tables;
  std::map<std::string, std::vector<std::string>> sources;
  std::map<std::string, std::int64_t> nights;
  int rate = 0;
  std::string first_error;

  for (const auto& pair : pairs) {
    try {
      const Recording rec = load_recording(pair.signal, options.channel);
      const auto annotations = options.kind == DatasetKind::kSleepEdf ? read_sleepedf_hypnogram(pair.annotations)
                                                                      : read_nsrr_xml(pair.annotations);
      if (rate != 0 && rec.sampling_rate_hz != rate) {
        throw ParseError("sampling rate " + std::to_string(rec.sampling_rate_hz) + " Hz differs from " +
                         std::to_string(rate) + " Hz of earlier recordings");
      }
      const auto epochs = segment_and_label(rec.samples, rec.sampling_rate_hz, annotations, pair.subject_id,
                                            options.segment);
      rate = rec.sampling_rate_hz;
      auto [it, inserted] = tables.try_emplace(pair.subject_id, pair.subject_id, rate, options.channel);
      const std::int64_t offset = nights[pair.subject_id]++ * kNightStride;
      for (const auto& e : epochs) {
        it->second.append(e.epoch.samples, options.strip_labels ? std::nullopt : std::optional(e.stage),
                          offset + e.epoch.index);
      }
      sources[pair.subject_id].push_back(fs::relative(pair.signal, raw_dir).generic_string());
    } catch (const Error& e) {
      result.failures.push_back({pair.signal, e.what()});
      if (first_error.empty()) first_error = pair.signal.string() + ": " + e.what();
    }
  }
  if (tables.empty()) throw ParseError("every recording failed; first failure: " + first_error);

  fs::create_directories(out_dir);
  DatasetManifest& m = result.manifest;
  m.dataset_kind = dataset_kind_name(options.kind);
  m.channel = options.channel;
  m.sampling_rate_hz = rate;
  const fs::path manifest_dir = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  fs::create_directories(manifest_dir);
  std::vector<EpochTable> all;
  for (auto& [id, table] : tables) {
    const fs::path file = out_dir / (id + ".hyc");
    write_canonical(file, table);
    SubjectEntry entry;
    entry.id = id;
    entry.canonical = fs::relative(fs::absolute(file), fs::absolute(manifest_dir));
    entry.recordings = sources[id];
    entry.epochs = table.size();
    m.subjects.push_back(std::move(entry));
    all.push_back(std::move(table));
  }
  m.save(manifest_path);
  m.base_dir = manifest_dir;
  result.stats = dataset_stats(all);
  return result;
}

std::vector<FoldSplit> manifest_folds(const DatasetManifest& manifest, std::size_t k, double val_fraction,
                                      std::uint64_t seed) {
  if (manifest.folds.empty()) {
    const auto ids = manifest.subject_ids();
    return kfold_split(ids, k == 0 ? ids.size() : k, val_fraction, seed);
  }
  // Stored folds fix the test sets; validation subjects are drawn from the
  // remainder the same way kfold_split draws them.
  std::vector<FoldSplit> out;
  for (std::size_t f = 0; f < manifest.folds.size(); ++f) {
    FoldSplit split;
    split.fold = f;
    split.test = manifest.folds[f];
    const std::set<std::string> test(split.test.begin(), split.test.end());
    std::vector<std::string> rest;
    for (const auto& id : manifest.subject_ids()) {
      if (!test.count(id)) rest.push_back(id);
    }
    auto rng = make_rng(seed, SeedPurpose::kSplit, f);
    std::shuffle(rest.begin(), rest.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(manifest.subjects.size())));
    if (n_val >= rest.size()) throw ConfigError("fold " + std::to_string(f) + " leaves no training subjects");
    split.validation.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_val), rest.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.train.begin(), split.train.end());
    out.push_back(std::move(split));
  }
  return out;
}

}  // namespace hypnos::ingest
