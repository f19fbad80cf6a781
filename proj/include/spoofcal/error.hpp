// Copyright 2026 The spoofcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace spoofcal {

/// Coarse error category. Each category maps onto one CLI exit code.
enum class ErrorKind {
  kUsage,    // bad arguments or configuration
  kData,     // malformed/incompatible input data or I/O failure
  kNumeric,  // optimization produced non-finite values
};

/// Fine-grained reason, so callers and tests can tell failures apart.
enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kBadMagic,
  kVersionMismatch,
  kUnsupportedDtype,
  kTruncated,
  kEmptyDimension,
  kNonFinite,
  kBadLabel,
  kLengthMismatch,
  kDimensionMismatch,
  kDuplicateId,
  kEmptyInput,
  kOutOfRange,
  kSingleClass,
  kBadManifest,
  kBadModel,
  kNonFiniteLoss,
};

inline const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kData: return "data";
    case ErrorKind::kNumeric: return "numeric";
  }
  return "unknown";
}

inline const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kUnsupportedDtype: return "unsupported_dtype";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kEmptyDimension: return "empty_dimension";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kBadLabel: return "bad_label";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kSingleClass: return "single_class";
    case ErrorCode::kBadManifest: return "bad_manifest";
    case ErrorCode::kBadModel: return "bad_model";
    case ErrorCode::kNonFiniteLoss: return "non_finite_loss";
  }
  return "unknown";
}

inline ErrorKind KindOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kEmptyInput:
      return ErrorKind::kUsage;
    case ErrorCode::kNonFiniteLoss:
      return ErrorKind::kNumeric;
    default:
      return ErrorKind::kData;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return KindOf(code_); }

 private:
  ErrorCode code_;
};

}  // namespace spoofcal
