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

#include "hypnos/ingest/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "hypnos/error.hpp"
#include "hypnos/ingest/canonical.hpp"
#include "hypnos/random.hpp"

namespace hypnos::ingest {

using nlohmann::json;

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  DatasetManifest m;
  try {
    json j = json::parse(in);
    m.dataset_kind = j.value("dataset_kind", "");
    m.channel = j.at("channel").get<std::string>();
    m.sampling_rate_hz = j.at("sampling_rate_hz").get<int>();
    for (const auto& s : j.at("subjects")) {
      SubjectEntry e;
      e.id = s.at("id").get<std::string>();
      e.canonical = s.at("canonical").get<std::string>();
      e.recordings = s.value("recordings", std::vector<std::string>{});
      e.epochs = s.value("epochs", std::size_t{0});
      m.subjects.push_back(std::move(e));
    }
    m.folds = j.value("folds", std::vector<std::vector<std::string>>{});
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  m.base_dir = path.parent_path();
  m.validate();
  return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  json j;
  j["format"] = "hypnos-manifest/1";
  j["dataset_kind"] = dataset_kind;
  j["channel"] = channel;
  j["sampling_rate_hz"] = sampling_rate_hz;
  j["subjects"] = json::array();
  for (const auto& s : subjects) {
    j["subjects"].push_back({{"id", s.id},
                             {"canonical", s.canonical.generic_string()},
                             {"recordings", s.recordings},
                             {"epochs", s.epochs}});
  }
  if (!folds.empty()) j["folds"] = folds;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
}

void DatasetManifest::validate() const {
  if (sampling_rate_hz <= 0) throw ConfigError("manifest sampling_rate_hz must be positive");
  std::set<std::string> ids;
  for (const auto& s : subjects) {
    if (!ids.insert(s.id).second) throw ConfigError("manifest repeats subject '" + s.id + "'");
  }
  if (folds.empty()) return;
  std::set<std::string> seen;
  for (const auto& fold : folds) {
    for (const auto& id : fold) {
      if (!ids.count(id)) throw ConfigError("fold references unknown subject '" + id + "'");
      if (!seen.insert(id).second) throw ConfigError("subject '" + id + "' appears in two folds");
    }
  }
  if (seen.size() != ids.size()) throw ConfigError("folds do not cover every subject");
}

std::vector<std::string> DatasetManifest::subject_ids() const {
  std::vector<std::string> out;
  for (const auto& s : subjects) out.push_back(s.id);
  return out;
}

const SubjectEntry& DatasetManifest::subject(const std::string& id) const {
  for (const auto& s : subjects) {
    if (s.id == id) return s;
  }
  throw ConfigError("manifest has no subject '" + id + "'");
}

EpochTable DatasetManifest::load_subject(const std::string& id) const {
  const SubjectEntry& e = subject(id);
  const auto path = e.canonical.is_absolute() ? e.canonical : base_dir / e.canonical;
  EpochTable t = read_canonical(path);
  if (t.sampling_rate_hz() != sampling_rate_hz) {
    throw ParseError(path.string() + ": sampling rate " + std::to_string(t.sampling_rate_hz()) +
                     " differs from the manifest's " + std::to_string(sampling_rate_hz));
  }
  return t;
}

std::vector<FoldSplit> kfold_split(const std::vector<std::string>& subjects, std::size_t k,
                                   double val_fraction, std::uint64_t seed) {
  const std::size_t n = subjects.size();
  if (k < 1) throw ConfigError("k must be at least 1");
  if (k > n) {
    throw ConfigError("k=" + std::to_string(k) + " exceeds the " + std::to_string(n) + " subjects");
  }
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must be in [0, 1)");
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));

  std::vector<FoldSplit> out;
  std::size_t begin = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    FoldSplit split;
    split.fold = f;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= begin && i < begin + size) {
        split.test.push_back(subjects[i]);
      } else {
        rest.push_back(subjects[i]);
      }
    }
    begin += size;
    if (n_val >= rest.size() && !(n_val == 0 && rest.empty())) {
      throw ConfigError("validation fraction leaves no training subjects in fold " + std::to_string(f));
    }
    std::vector<std::size_t> order(rest.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed, SeedPurpose::kSplit, f);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> is_val(rest.size(), false);
    for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = true;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      (is_val[i] ? split.validation : split.train).push_back(rest[i]);
    }
    out.push_back(std::move(split));
  }
  return out;
}

namespace {

class StatsAccumulator {
 public:
  void add(float v) {
    const double x = v;
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  void finish(DatasetStats& s) const {
    if (count_ == 0) throw EmptyDatasetError("dataset has no samples");
    s.mean = mean_;
    s.std = std::sqrt(m2_ / static_cast<double>(count_));
    s.min = min_;
    s.max = max_;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

DatasetStats dataset_stats(const std::vector<EpochTable>& tables) {
  DatasetStats s;
  StatsAccumulator acc;
  for (const auto& t : tables) {
    for (float v : t.all_samples()) acc.add(v);
    for (std::size_t r = 0; r < t.size(); ++r) {
      ++s.total_epochs;
      if (t.labeled(r)) {
        ++s.stage_counts[t.stage_code(r)];
      } else {
        ++s.unlabeled_epochs;
      }
    }
  }
  if (s.total_epochs == 0) throw EmptyDatasetError("dataset has no epochs");
  acc.finish(s);
  return s;
}

DatasetStats dataset_stats(const std::vector<LabeledEpoch>& epochs) {
  DatasetStats s;
  StatsAccumulator acc;
  for (const auto& le : epochs) {
    for (float v : le.epoch.samples) acc.add(v);
    ++s.total_epochs;
    ++s.stage_counts[static_cast<std::size_t>(le.stage)];
  }
  if (s.total_epochs == 0) throw EmptyDatasetError("dataset has no epochs");
  acc.finish(s);
  return s;
}

}  // namespace hypnos::ingest
