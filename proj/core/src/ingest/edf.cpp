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

#include "hypnos/ingest/edf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hypnos/error.hpp"

namespace hypnos::ingest {
namespace {

constexpr std::size_t kFixedHeaderBytes = 256;
constexpr std::size_t kSignalHeaderBytes = 256;
constexpr char kTalOnsetEnd = '\x14';
constexpr char kTalDurationStart = '\x15';

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

class FieldReader {
 public:
  FieldReader(const std::vector<char>& bytes, std::size_t offset)
      : bytes_(bytes), offset_(offset) {}

  std::string text(std::size_t width) {
    if (offset_ + width > bytes_.size()) throw ParseError("EDF header truncated");
    std::string out(bytes_.data() + offset_, width);
    offset_ += width;
    return trim(out);
  }

  double real(std::size_t width, const char* field) {
    std::string s = text(width);
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError(std::string("EDF header field '") + field + "' is not numeric: '" + s + "'");
    }
  }

  std::int64_t integer(std::size_t width, const char* field) {
    std::string s = text(width);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(std::string("EDF header field '") + field + "' is not an integer: '" + s +
                       "'");
    }
    return v;
  }

  std::size_t offset() const { return offset_; }

 private:
  const std::vector<char>& bytes_;
  std::size_t offset_;
};

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Fixed-width ASCII field, left aligned and space padded.
std::string field(std::string_view value, std::size_t width) {
  std::string out(value.substr(0, width));
  out.resize(width, ' ');
  return out;
}

// Shortest %g rendering that fits the field width.
std::string number_field(double value, std::size_t width) {
  char buf[64];
  for (int precision = 12; precision >= 1; --precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    if (std::strlen(buf) <= width) return field(buf, width);
  }
  throw ConfigError("value does not fit an EDF header field");
}

std::string integer_field(std::int64_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() > width) throw ConfigError("integer does not fit an EDF header field");
  return field(s, width);
}

std::string format_onset(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.6g", seconds);
  return buf;
}

}  // namespace

double EdfSignalHeader::gain() const {
  if (digital_max == digital_min) return 1.0;
  return (physical_max - physical_min) / static_cast<double>(digital_max - digital_min);
}

double EdfSignalHeader::offset() const { return physical_max - gain() * digital_max; }

int EdfHeader::find_signal(const std::string& label) const {
  const std::string wanted = trim(label);
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (signals[i].label == wanted) return static_cast<int>(i);
  }
  // Vendor prefixes such as "EEG Fpz-Cz" carry the electrode pair last.
  for (std::size_t i = 0; i < signals.size(); ++i) {
    const std::string& l = signals[i].label;
    auto space = l.find_last_of(' ');
    if (space != std::string::npos && l.substr(space + 1) == wanted) return static_cast<int>(i);
  }
  return -1;
}

std::size_t EdfHeader::record_bytes() const {
  std::size_t total = 0;
  for (const auto& s : signals) total += 2 * static_cast<std::size_t>(s.samples_per_record);
  return total;
}

EdfFile EdfFile::open(const std::filesystem::path& path) {
  EdfFile file;
  file.path_ = path;
  std::vector<char> bytes = read_file(path);
  if (bytes.size() < kFixedHeaderBytes) throw ParseError(path.string() + ": shorter than an EDF header");

  EdfHeader& h = file.header_;
  FieldReader r(bytes, 0);
  h.version = r.text(8);
  if (h.version != "0") throw ParseError(path.string() + ": unsupported EDF version '" + h.version + "'");
  h.patient = r.text(80);
  h.recording = r.text(80);
  h.start_date = r.text(8);
  h.start_time = r.text(8);
  h.header_bytes = static_cast<std::int32_t>(r.integer(8, "header bytes"));
  h.reserved = r.text(44);
  h.num_records = r.integer(8, "number of data records");
  h.record_duration_s = r.real(8, "record duration");
  const std::int64_t ns = r.integer(4, "number of signals");
  if (ns <= 0 || ns > 4096) throw ParseError(path.string() + ": implausible signal count");
  if (h.header_bytes != static_cast<std::int64_t>(kFixedHeaderBytes + ns * kSignalHeaderBytes)) {
    throw ParseError(path.string() + ": header byte count disagrees with signal count");
  }
  if (bytes.size() < static_cast<std::size_t>(h.header_bytes)) {
    throw ParseError(path.string() + ": signal headers truncated");
  }

  h.signals.resize(static_cast<std::size_t>(ns));
  for (auto& s : h.signals) s.label = r.text(16);
  for (auto& s : h.signals) s.transducer = r.text(80);
  for (auto& s : h.signals) s.physical_dimension = r.text(8);
  for (auto& s : h.signals) s.physical_min = r.real(8, "physical minimum");
  for (auto& s : h.signals) s.physical_max = r.real(8, "physical maximum");
  for (auto& s : h.signals) s.digital_min = static_cast<std::int32_t>(r.integer(8, "digital minimum"));
  for (auto& s : h.signals) s.digital_max = static_cast<std::int32_t>(r.integer(8, "digital maximum"));
  for (auto& s : h.signals) s.prefiltering = r.text(80);
  for (auto& s : h.signals) {
    s.samples_per_record = static_cast<std::int32_t>(r.integer(8, "samples per record"));
    if (s.samples_per_record <= 0) throw ParseError(path.string() + ": non-positive samples per record");
  }
  for (std::size_t i = 0; i < h.signals.size(); ++i) r.text(32);
  for (const auto& s : h.signals) {
    if (s.digital_max <= s.digital_min) {
      throw ParseError(path.string() + ": signal '" + s.label + "' has an empty digital range");
    }
  }
  if (h.record_duration_s < 0.0) throw ParseError(path.string() + ": negative record duration");

  const std::size_t data_bytes = bytes.size() - static_cast<std::size_t>(h.header_bytes);
  const std::size_t rec_bytes = h.record_bytes();
  const std::int64_t available = static_cast<std::int64_t>(data_bytes / rec_bytes);
  if (h.num_records < 0) {
    h.num_records = available;  // -1 while recording; trust the file size
  } else if (h.num_records > available) {
    throw ParseError(path.string() + ": header declares " + std::to_string(h.num_records) +
                     " records but the file holds " + std::to_string(available));
  }
  file.data_.assign(bytes.begin() + h.header_bytes,
                    bytes.begin() + h.header_bytes + h.num_records * static_cast<std::int64_t>(rec_bytes));
  return file;
}

std::vector<double> EdfFile::read_physical(int signal) const {
  if (signal < 0 || signal >= static_cast<int>(header_.signals.size())) {
    throw ChannelNotFound("signal index out of range");
  }
  const auto& sh = header_.signals[static_cast<std::size_t>(signal)];
  std::size_t before = 0;
  for (int i = 0; i < signal; ++i) before += 2 * static_cast<std::size_t>(header_.signals[i].samples_per_record);
  const std::size_t rec_bytes = header_.record_bytes();
  const double gain = sh.gain();
  const double offset = sh.offset();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(header_.num_records) * sh.samples_per_record);
  for (std::int64_t rec = 0; rec < header_.num_records; ++rec) {
    const char* p = data_.data() + rec * rec_bytes + before;
    for (std::int32_t k = 0; k < sh.samples_per_record; ++k) {
      const auto lo = static_cast<std::uint8_t>(p[2 * k]);
      const auto hi = static_cast<std::uint8_t>(p[2 * k + 1]);
      const auto digital = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
      out.push_back(gain * digital + offset);
    }
  }
  return out;
}

std::string EdfFile::read_raw_bytes(int signal) const {
  const auto& sh = header_.signals.at(static_cast<std::size_t>(signal));
  std::size_t before = 0;
  for (int i = 0; i < signal; ++i) before += 2 * static_cast<std::size_t>(header_.signals[i].samples_per_record);
  const std::size_t rec_bytes = header_.record_bytes();
  std::string out;
  for (std::int64_t rec = 0; rec < header_.num_records; ++rec) {
    out.append(data_.data() + rec * rec_bytes + before, 2 * static_cast<std::size_t>(sh.samples_per_record));
  }
  return out;
}

int EdfFile::sampling_rate_hz(int signal) const {
  const auto& sh = header_.signals.at(static_cast<std::size_t>(signal));
  if (header_.record_duration_s <= 0.0) throw ParseError(path_.string() + ": zero record duration");
  const double rate = sh.samples_per_record / header_.record_duration_s;
  const double rounded = std::round(rate);
  if (rounded < 1.0 || std::abs(rate - rounded) > 1e-6) {
    throw ParseError(path_.string() + ": non-integral sampling rate " + std::to_string(rate));
  }
  return static_cast<int>(rounded);
}

std::vector<EdfAnnotation> parse_annotation_bytes(const std::string& bytes) {
  std::vector<EdfAnnotation> out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes[pos] == '\0') {
      ++pos;
      continue;
    }
    const std::size_t end = bytes.find('\0', pos);
    const std::string tal = bytes.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    pos = end == std::string::npos ? bytes.size() : end + 1;

    const std::size_t first_sep = tal.find(kTalOnsetEnd);
    if (first_sep == std::string::npos) throw ParseError("annotation list without a 0x14 separator");
    const std::string timing = tal.substr(0, first_sep);
    if (timing.empty() || (timing[0] != '+' && timing[0] != '-')) {
      throw ParseError("annotation onset must start with a sign: '" + timing + "'");
    }
    double onset = 0.0;
    double duration = 0.0;
    try {
      const std::size_t dur = timing.find(kTalDurationStart);
      onset = std::stod(timing.substr(0, dur));
      if (dur != std::string::npos) duration = std::stod(timing.substr(dur + 1));
    } catch (const std::exception&) {
      throw ParseError("malformed annotation timing '" + timing + "'");
    }
    std::size_t text_pos = first_sep + 1;
    while (text_pos < tal.size()) {
      std::size_t next = tal.find(kTalOnsetEnd, text_pos);
      if (next == std::string::npos) next = tal.size();
      std::string text = tal.substr(text_pos, next - text_pos);
      if (!text.empty()) out.push_back(EdfAnnotation{onset, duration, std::move(text)});
      text_pos = next + 1;
    }
  }
  return out;
}

std::vector<EdfAnnotation> read_annotations(const EdfFile& file) {
  const int idx = file.header().find_signal(kEdfAnnotationsLabel);
  if (idx < 0) throw ChannelNotFound(file.path().string() + ": no 'EDF Annotations' signal");
  return parse_annotation_bytes(file.read_raw_bytes(idx));
}

void write_edf(const std::filesystem::path& path, const EdfWriteRequest& request) {
  if (request.record_duration_s <= 0.0) throw ConfigError("record duration must be positive");
  const bool plus = !request.annotations.empty();

  std::int64_t num_records = -1;
  for (const auto& s : request.signals) {
    const auto spr = static_cast<std::size_t>(s.header.samples_per_record);
    if (spr == 0 || s.physical.size() % spr != 0) {
      throw ConfigError("signal '" + s.header.label + "' does not fill whole data records");
    }
    const auto n = static_cast<std::int64_t>(s.physical.size() / spr);
    if (num_records >= 0 && n != num_records) throw ConfigError("signals span different record counts");
    num_records = n;
  }
  if (num_records < 0) {
    if (!plus) throw ConfigError("nothing to write");
    num_records = 1;
  }

  // First record carries every annotation after its timekeeping entry.
  std::vector<std::string> tal_records(static_cast<std::size_t>(num_records));
  for (std::int64_t rec = 0; rec < num_records && plus; ++rec) {
    std::string& t = tal_records[static_cast<std::size_t>(rec)];
    t = format_onset(rec * request.record_duration_s) + "\x14\x14";
    t.push_back('\0');
    if (rec == 0) {
      for (const auto& a : request.annotations) {
        t += format_onset(a.onset_s);
        if (a.duration_s > 0.0) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.6g", a.duration_s);
          t += '\x15';
          t += buf;
        }
        t += '\x14';
        t += a.text;
        t += '\x14';
        t.push_back('\0');
      }
    }
  }
  std::int32_t annot_samples = 0;
  if (plus) {
    std::size_t longest = 0;
    for (const auto& t : tal_records) longest = std::max(longest, t.size());
    annot_samples = request.annotation_bytes_per_record > 0
                        ? (request.annotation_bytes_per_record + 1) / 2
                        : static_cast<std::int32_t>((longest + 1) / 2);
    if (static_cast<std::size_t>(annot_samples) * 2 < longest) {
      throw ConfigError("annotation bytes per record too small");
    }
  }

  std::vector<EdfSignalHeader> headers;
  for (const auto& s : request.signals) headers.push_back(s.header);
  if (plus) {
    EdfSignalHeader a;
    a.label = kEdfAnnotationsLabel;
    a.physical_min = -1.0;
    a.physical_max = 1.0;
    a.digital_min = -32768;
    a.digital_max = 32767;
    a.samples_per_record = annot_samples;
    headers.push_back(a);
  }
  const std::size_t ns = headers.size();

  std::string out;
  out += field("0", 8);
  out += field(request.patient, 80);
  out += field(request.recording, 80);
  out += field("01.01.85", 8);
  out += field("00.00.00", 8);
  out += integer_field(static_cast<std::int64_t>(kFixedHeaderBytes + ns * kSignalHeaderBytes), 8);
  out += field(plus ? "EDF+C" : "", 44);
  out += integer_field(num_records, 8);
  out += number_field(request.record_duration_s, 8);
  out += integer_field(static_cast<std::int64_t>(ns), 4);
  for (const auto& h : headers) out += field(h.label, 16);
  for (const auto& h : headers) out += field(h.transducer, 80);
  for (const auto& h : headers) out += field(h.physical_dimension, 8);
  for (const auto& h : headers) out += number_field(h.physical_min, 8);
  for (const auto& h : headers) out += number_field(h.physical_max, 8);
  for (const auto& h : headers) out += integer_field(h.digital_min, 8);
  for (const auto& h : headers) out += integer_field(h.digital_max, 8);
  for (const auto& h : headers) out += field(h.prefiltering, 80);
  for (const auto& h : headers) out += integer_field(h.samples_per_record, 8);
  for (std::size_t i = 0; i < ns; ++i) out += field("", 32);

  auto put16 = [&out](std::int32_t v) {
    const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
    out.push_back(static_cast<char>(u & 0xFF));
    out.push_back(static_cast<char>(u >> 8));
  };
  for (std::int64_t rec = 0; rec < num_records; ++rec) {
    for (const auto& s : request.signals) {
      const auto& h = s.header;
      const double gain = h.gain();
      const auto spr = static_cast<std::size_t>(h.samples_per_record);
      for (std::size_t k = 0; k < spr; ++k) {
        const double phys = s.physical[static_cast<std::size_t>(rec) * spr + k];
        double dig = std::round((phys - h.physical_min) / gain + h.digital_min);
        dig = std::clamp(dig, static_cast<double>(h.digital_min), static_cast<double>(h.digital_max));
        put16(static_cast<std::int32_t>(dig));
      }
    }
    if (plus) {
      std::string t = tal_records[static_cast<std::size_t>(rec)];
      t.resize(static_cast<std::size_t>(annot_samples) * 2, '\0');
      out += t;
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Recording load_recording(const std::filesystem::path& path, const std::string& channel_name) {
  EdfFile file = EdfFile::open(path);
  const int idx = file.header().find_signal(channel_name);
  if (idx < 0) {
    std::ostringstream msg;
    msg << path.string() << ": channel '" << channel_name << "' not found; available:";
    for (const auto& s : file.header().signals) msg << " '" << s.label << "'";
    throw ChannelNotFound(msg.str());
  }
  Recording r;
  r.samples = file.read_physical(idx);
  r.sampling_rate_hz = file.sampling_rate_hz(idx);
  r.subject_id = path.stem().string();
  return r;
}

}  // namespace hypnos::ingest
