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

#include "hypnos/ingest/canonical.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hypnos/error.hpp"

namespace hypnos::ingest {
namespace {

constexpr char kMagic[8] = {'H', 'Y', 'P', 'N', 'O', 'S', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "canonical files are written with native little-endian stores");

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    bytes.append(buf, sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes += s;
  }
  template <typename T>
  void put_array(const std::vector<T>& v) {
    bytes.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
  }
  std::string bytes;
};

class Reader {
 public:
  Reader(std::vector<char> data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  std::vector<T> get_array(std::size_t count) {
    need(count * sizeof(T));
    std::vector<T> out(count);
    std::memcpy(out.data(), data_.data() + pos_, count * sizeof(T));
    pos_ += count * sizeof(T);
    return out;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw ParseError(name_ + ": canonical file truncated");
  }
  std::vector<char> data_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_canonical(const std::filesystem::path& path, const EpochTable& table) {
  Writer w;
  w.bytes.append(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kVersion);
  w.put_string(table.subject_id());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(table.sampling_rate_hz()));
  w.put_string(table.channel());
  w.put<std::uint64_t>(table.size());
  auto samples = table.all_samples();
  w.bytes.append(reinterpret_cast<const char*>(samples.data()), samples.size_bytes());
  w.put_array(table.stage_codes());
  w.put_array(table.epoch_indices());

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path.string());
  out.write(w.bytes.data(), static_cast<std::streamsize>(w.bytes.size()));
}

EpochTable read_canonical(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()),
           path.string());
  char magic[8];
  for (char& c : magic) c = r.get<char>();
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ParseError(path.string() + ": bad magic");
  if (r.get<std::uint32_t>() != kVersion) throw ParseError(path.string() + ": unsupported version");
  std::string subject = r.get_string();
  const auto rate = static_cast<int>(r.get<std::uint32_t>());
  std::string channel = r.get_string();
  const auto count = static_cast<std::size_t>(r.get<std::uint64_t>());
  if (rate <= 0) throw ParseError(path.string() + ": non-positive sampling rate");
  const std::size_t n = samples_per_epoch(rate);
  auto samples = r.get_array<float>(count * n);
  auto codes = r.get_array<std::uint8_t>(count);
  auto index = r.get_array<std::int64_t>(count);
  if (!r.at_end()) throw ParseError(path.string() + ": trailing bytes");

  EpochTable table(std::move(subject), rate, std::move(channel));
  for (std::size_t i = 0; i < count; ++i) {
    std::optional<SleepStage> stage;
    if (codes[i] != EpochTable::kUnlabeled) {
      if (codes[i] >= kNumStages) throw ParseError(path.string() + ": invalid stage code");
      stage = static_cast<SleepStage>(codes[i]);
    }
    table.append(std::span<const float>(samples).subspan(i * n, n), stage, index[i]);
  }
  return table;
}

}  // namespace hypnos::ingest
