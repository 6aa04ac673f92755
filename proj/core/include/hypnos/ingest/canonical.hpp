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

#include "hypnos/types.hpp"

namespace hypnos::ingest {

// Per-subject binary file decoupling EDF parsing from training.
//
// Layout, all integers little-endian:
//   char[8]   magic "HYPNOSC1"
//   u32       format version (1)
//   u32 + []  subject id (length-prefixed UTF-8)
//   u32       sampling rate in Hz
//   u32 + []  channel name
//   u64       epoch count E
//   f32[E*N]  samples, N = 30 * rate
//   u8[E]     stage codes 0..4 (W, N1, N2, N3, REM), 255 = unlabeled
//   i64[E]    epoch position on the recording timeline
void write_canonical(const std::filesystem::path& path, const EpochTable& table);
EpochTable read_canonical(const std::filesystem::path& path);

}  // namespace hypnos::ingest
