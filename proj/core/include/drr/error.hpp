// Copyright 2026 The drr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drr {

enum class ErrorCode {
  // Malformed or unsupported input data.
  kBadMagic,
  kUnsupportedDatatype,
  kUnsupportedOrientation,
  kTruncatedData,
  kDimMismatch,
  kUnknownLabelCode,
  kGeometryMismatch,
  kNonFiniteValue,
  kNoLungRegion,
  kEmptyInput,
  kEmptyDataset,
  // Caller errors.
  kInvalidArgument,
  kIndexOutOfRange,
  // Filesystem.
  kIoFailure,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// front ends can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  bool is_io() const noexcept { return code_ == ErrorCode::kIoFailure; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace drr
