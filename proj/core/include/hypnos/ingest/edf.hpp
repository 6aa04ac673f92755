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
#include <string>
#include <vector>

namespace hypnos::ingest {

// Header of an EDF or EDF+ file. Field widths follow the published layout:
// a 256-byte fixed block followed by 256 bytes per signal.
struct EdfSignalHeader {
  std::string label;
  std::string transducer;
  std::string physical_dimension;
  double physical_min = 0.0;
  double physical_max = 0.0;
  std::int32_t digital_min = 0;
  std::int32_t digital_max = 0;
  std::string prefiltering;
  std::int32_t samples_per_record = 0;

  // Maps a stored integer to physical units.
  double gain() const;
  double offset() const;
};

struct EdfHeader {
  std::string version = "0";
  std::string patient;
  std::string recording;
  std::string start_date = "01.01.85";
  std::string start_time = "00.00.00";
  std::int32_t header_bytes = 0;
  std::string reserved;  // "EDF+C" / "EDF+D" for EDF+
  std::int64_t num_records = 0;
  double record_duration_s = 1.0;
  std::vector<EdfSignalHeader> signals;

  bool is_edf_plus() const { return reserved.rfind("EDF+", 0) == 0; }
  // Index of the signal with the given (whitespace-trimmed) label, or -1.
  int find_signal(const std::string& label) const;
  std::size_t record_bytes() const;
};

inline constexpr const char* kEdfAnnotationsLabel = "EDF Annotations";

class EdfFile {
 public:
  // Throws ParseError on a malformed header or truncated file.
  static EdfFile open(const std::filesystem::path& path);

  const EdfHeader& header() const { return header_; }
  const std::filesystem::path& path() const { return path_; }

  // Physical values of one signal across all data records.
  std::vector<double> read_physical(int signal) const;
  // Raw bytes of one signal across all records (EDF+ annotation channels).
  std::string read_raw_bytes(int signal) const;
  // Samples per second of an ordinary signal; throws ParseError when the
  // record layout does not give an integral rate.
  int sampling_rate_hz(int signal) const;

 private:
  std::filesystem::path path_;
  EdfHeader header_;
  std::vector<char> data_;  // every data record, contiguous
};

// A time-stamped annotation list entry.
struct EdfAnnotation {
  double onset_s = 0.0;
  double duration_s = 0.0;
  std::string text;
};

// Parses the time-stamped annotation lists of an EDF+ annotation channel.
// Record-timekeeping entries (empty text) are omitted.
std::vector<EdfAnnotation> parse_annotation_bytes(const std::string& bytes);

std::vector<EdfAnnotation> read_annotations(const EdfFile& file);

// Writer used for fixtures and synthetic exports.
struct EdfSignalData {
  EdfSignalHeader header;
  std::vector<double> physical;  // values; quantized on write
};

struct EdfWriteRequest {
  std::string patient = "X X X X";
  std::string recording = "Startdate X X X X";
  double record_duration_s = 1.0;
  std::vector<EdfSignalData> signals;
  std::vector<EdfAnnotation> annotations;  // non-empty writes an EDF+C file
  std::int32_t annotation_bytes_per_record = 0;  // 0 picks a size that fits
};

void write_edf(const std::filesystem::path& path, const EdfWriteRequest& request);

// Single-channel extraction result.
struct Recording {
  std::vector<double> samples;
  int sampling_rate_hz = 0;
  std::string subject_id;
};

// Reads one channel at its native rate. Throws ChannelNotFound or ParseError.
// The subject id defaults to the file stem.
Recording load_recording(const std::filesystem::path& path, const std::string& channel_name);

}  // namespace hypnos::ingest
