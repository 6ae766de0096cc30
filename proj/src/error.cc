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

#include "dpad/error.h"

namespace dpad {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidBox: return "InvalidBox";
    case ErrorCode::kInvalidThreshold: return "InvalidThreshold";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMalformedRle: return "MalformedRLE";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kZeroNorm: return "ZeroNorm";
    case ErrorCode::kRoleMismatch: return "RoleMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kMagicMismatch: return "MagicMismatch";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kDuplicateKey: return "DuplicateKey";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kGroupTooSmall: return "GroupTooSmall";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNonPositiveDenominator: return "NonPositiveDenominator";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kCrossRefError: return "CrossRefError";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message), code_(code) {}

}  // namespace dpad
