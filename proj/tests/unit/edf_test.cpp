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

#include <cmath>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hypnos/error.hpp"
#include "temp_dir.hpp"

namespace hypnos::ingest {
namespace {

TEST(Edf, SignalsRoundTripWithinQuantization) {
  testing::TempDir dir;
  std::vector<double> values(300);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = 400.0 * std::sin(0.05 * static_cast<double>(i));
  EdfWriteRequest req;
  req.record_duration_s = 1.0;
  req.signals.push_back(testing::make_signal("EEG Fpz-Cz", 100, values));
  req.signals.push_back(testing::make_signal("EOG", 50, std::vector<double>(150, 1.0)));
  write_edf(dir / "a.edf", req);

  const auto f = EdfFile::open(dir / "a.edf");
  EXPECT_FALSE(f.header().is_edf_plus());
  EXPECT_EQ(f.header().num_records, 3);
  ASSERT_EQ(f.header().signals.size(), 2u);
  const int eeg = f.header().find_signal("EEG Fpz-Cz");
  ASSERT_EQ(eeg, 0);
  EXPECT_EQ(f.header().find_signal("EMG"), -1);
  EXPECT_EQ(f.sampling_rate_hz(eeg), 100);
  EXPECT_EQ(f.sampling_rate_hz(1), 50);
  const auto back = f.read_physical(eeg);
  ASSERT_EQ(back.size(), values.size());
  const double step = 1000.0 / 65535.0;
  for (std::size_t i = 0; i < values.size(); ++i) EXPECT_NEAR(back[i], values[i], step);
}

TEST(Edf, AnnotationsRoundTrip) {
  testing::TempDir dir;
  EdfWriteRequest req;
  req.record_duration_s = 30.0;
  req.annotations = {{0.0, 60.0, "Sleep stage W"}, {60.0, 30.0, "Sleep stage 4"}, {90.0, 30.0, "Movement time"}};
  write_edf(dir / "h.edf", req);
  const auto f = EdfFile::open(dir / "h.edf");
  EXPECT_TRUE(f.header().is_edf_plus());
  const auto ann = read_annotations(f);
  ASSERT_EQ(ann.size(), 3u);
  EXPECT_EQ(ann[1].text, "Sleep stage 4");
  EXPECT_DOUBLE_EQ(ann[1].onset_s, 60.0);
  EXPECT_DOUBLE_EQ(ann[0].duration_s, 60.0);
}

TEST(Edf, ParsesTimeStampedAnnotationLists) {
  const std::string tal = std::string("+0\x14\x14\0", 5) + std::string("+30.5\x15" "30\x14Sleep stage 2\x14\0", 24) +
                          std::string("-1\x14" "a\x14" "b\x14\0", 8);
  const auto ann = parse_annotation_bytes(tal);
  ASSERT_EQ(ann.size(), 3u);
  EXPECT_DOUBLE_EQ(ann[0].onset_s, 30.5);
  EXPECT_DOUBLE_EQ(ann[0].duration_s, 30.0);
  EXPECT_EQ(ann[0].text, "Sleep stage 2");
  EXPECT_DOUBLE_EQ(ann[1].onset_s, -1.0);
  EXPECT_EQ(ann[2].text, "b");
}

TEST(Edf, TruncatedOrMalformedFilesAreParseErrors) {
  testing::TempDir dir;
  EdfWriteRequest req;
  req.signals.push_back(testing::make_signal("EEG", 10, std::vector<double>(40, 0.0)));
  write_edf(dir / "ok.edf", req);
  {
    std::ifstream in(dir / "ok.edf", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream(dir / "short.edf", std::ios::binary) << bytes.substr(0, bytes.size() - 7);
    bytes[236] = 'x';  // record count
    std::ofstream(dir / "bad.edf", std::ios::binary) << bytes;
  }
  EXPECT_THROW(EdfFile::open(dir / "short.edf"), ParseError);
  EXPECT_THROW(EdfFile::open(dir / "bad.edf"), ParseError);
  EXPECT_THROW(EdfFile::open(dir / "missing.edf"), ParseError);
  std::ofstream(dir / "tiny.edf") << "0       ";
  EXPECT_THROW(EdfFile::open(dir / "tiny.edf"), ParseError);
}

TEST(Edf, LoadRecordingPicksTheNamedChannel) {
  testing::TempDir dir;
  testing::NightSpec night;
  night.labels = {"Sleep stage W", "Sleep stage 1"};
  testing::write_sleepedf_night(dir.path(), night);
  const auto rec = load_recording(dir / night.psg_name, "EEG Fpz-Cz");
  EXPECT_EQ(rec.sampling_rate_hz, 10);
  EXPECT_EQ(rec.samples.size(), 600u);
  EXPECT_EQ(rec.subject_id, "SC4001E0-PSG");
  try {
    load_recording(dir / night.psg_name, "EEG C3");
    FAIL();
  } catch (const ChannelNotFound& e) {
    EXPECT_NE(std::string(e.what()).find("EEG Pz-Oz"), std::string::npos) << "should list available channels";
  }
}

}  // namespace
}  // namespace hypnos::ingest
