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

#include "hypnos/train/data.hpp"

#include <algorithm>
#include <cstring>

#include "hypnos/error.hpp"

namespace hypnos::train {

SubjectVocabulary::SubjectVocabulary(std::vector<std::string> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

std::int64_t SubjectVocabulary::index(const std::string& id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  return (it != ids_.end() && *it == id) ? it - ids_.begin() : -1;
}

EpochData stack_epochs(const std::vector<EpochTable>& tables, const SubjectVocabulary& vocabulary,
                       bool labeled_only) {
  std::int64_t rows = 0;
  std::int64_t n = 0;
  for (const auto& t : tables) {
    if (t.empty()) continue;
    if (n != 0 && static_cast<std::int64_t>(t.epoch_length()) != n) {
      throw ShapeError("tables mix sampling rates");
    }
    n = static_cast<std::int64_t>(t.epoch_length());
    for (std::size_t r = 0; r < t.size(); ++r) rows += (!labeled_only || t.labeled(r)) ? 1 : 0;
  }
  EpochData out;
  out.x = torch::empty({rows, n}, torch::kFloat32);
  out.stages = torch::empty({rows}, torch::kInt64);
  out.subjects = torch::empty({rows}, torch::kInt64);
  auto* x = out.x.data_ptr<float>();
  auto* y = out.stages.data_ptr<std::int64_t>();
  auto* d = out.subjects.data_ptr<std::int64_t>();
  std::int64_t i = 0;
  for (const auto& t : tables) {
    const auto subject = vocabulary.index(t.subject_id());
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (labeled_only && !t.labeled(r)) continue;
      const auto s = t.samples(r);
      std::memcpy(x + i * n, s.data(), s.size() * sizeof(float));
      y[i] = t.labeled(r) ? t.stage_code(r) : -1;
      d[i] = subject;
      ++i;
    }
  }
  return out;
}

}  // namespace hypnos::train
