// Copyright 2026 The DPAD Toolkit Authors.
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

#ifndef DPAD_ERROR_H_
#define DPAD_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpad {

enum class ErrorCode {
  kInvalidBox,
  kInvalidThreshold,
  kShapeMismatch,
  kMalformedRle,
  kDimMismatch,
  kZeroNorm,
  kRoleMismatch,
  kNonFinite,
  kMagicMismatch,
  kUnsupportedVersion,
  kDuplicateKey,
  kTruncated,
  kMissingGroundTruth,
  kMissingEmbedding,
  kGroupTooSmall,
  kNonFiniteGradient,
  kEmptyInput,
  kNonPositiveDenominator,
  kSchemaMismatch,
  kParseError,
  kCrossRefError,
  kInvalidConfig,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Thrown by every module for contract violations. The CLI maps kIoError to
// exit status 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dpad

#endif  // DPAD_ERROR_H_
