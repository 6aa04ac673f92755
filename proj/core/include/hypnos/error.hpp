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

#include <stdexcept>
#include <string>

namespace hypnos {

// Coarse failure classes; each maps to a distinct process exit code.
enum class ErrorCategory { kConfig, kData, kCheckpoint, kNumerical, kInternal };

int exit_code_for(ErrorCategory category);
const char* category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

#define HYPNOS_DEFINE_ERROR(Name, Category)                               \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(Category, what) {}     \
  }

HYPNOS_DEFINE_ERROR(ConfigError, ErrorCategory::kConfig);
HYPNOS_DEFINE_ERROR(ParseError, ErrorCategory::kData);
HYPNOS_DEFINE_ERROR(ChannelNotFound, ErrorCategory::kData);
HYPNOS_DEFINE_ERROR(AlignmentError, ErrorCategory::kData);
HYPNOS_DEFINE_ERROR(EmptyDatasetError, ErrorCategory::kData);
HYPNOS_DEFINE_ERROR(EmptyEvaluationError, ErrorCategory::kData);
HYPNOS_DEFINE_ERROR(LabelError, ErrorCategory::kData);
HYPNOS_DEFINE_ERROR(BatchError, ErrorCategory::kData);
HYPNOS_DEFINE_ERROR(DegenerateBatchError, ErrorCategory::kData);
HYPNOS_DEFINE_ERROR(ShapeError, ErrorCategory::kInternal);
HYPNOS_DEFINE_ERROR(NumericalError, ErrorCategory::kNumerical);
HYPNOS_DEFINE_ERROR(CheckpointError, ErrorCategory::kCheckpoint);
HYPNOS_DEFINE_ERROR(TransferError, ErrorCategory::kCheckpoint);

#undef HYPNOS_DEFINE_ERROR

}  // namespace hypnos
