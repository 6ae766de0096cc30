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

// Parsing and format validation of structured policy outputs.
//
// A well-formed output carries exactly one of each block, in this order,
// with arbitrary text between and around them:
//
//   <think>...</think> <answer>{"bbox":[x1,y1,x2,y2],
//   "points_1":[x,y],"points_2":[x,y]}</answer> <caption>...</caption>

#ifndef DPAD_ROLLOUT_H_
#define DPAD_ROLLOUT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "dpad/geometry.h"

namespace dpad {

struct RawRollout {
  std::string sample_id;
  std::string text;
  std::optional<uint64_t> token_count;
};

struct Rollout {
  std::string sample_id;
  std::string think;
  Localization answer;
  std::string caption;
  uint64_t token_count = 0;

  friend bool operator==(const Rollout&, const Rollout&) = default;
};

enum class ParseErrorKind {
  kInvalidUtf8,
  kMissingTag,
  kTagOrderViolation,
  kPayloadSyntaxError,
  kMissingKey,
  kMalformedValue,
};

std::string_view ParseErrorKindName(ParseErrorKind kind);

struct ParseError {
  ParseErrorKind kind;
  std::string which;             // tag or key name, when applicable
  std::optional<size_t> offset;  // byte offset into the raw text
  std::string message;

  std::string ToString() const;
};

using ParseOutcome = std::variant<Rollout, ParseError>;

// Never throws on arbitrary input; every failure comes back as a ParseError.
// When raw.token_count is absent the whitespace word count of the full text
// is used.
ParseOutcome ParseRollout(const RawRollout& raw);

struct FormatChecks {
  bool tags_ok = false;     // each tag exactly once, think -> answer -> caption
  bool json_ok = false;     // answer payload decodes into a Localization
  bool caption_ok = false;  // caption block found and not blank

  friend bool operator==(const FormatChecks&, const FormatChecks&) = default;
};

// Each flag is computed independently: json_ok and caption_ok look at the
// first block of their kind even when the tag order is wrong.
FormatChecks CheckFormat(std::string_view text);

enum class FormatAggregation { kSum, kProduct };

// Sum of the three binary checks (range [0, 3]); kProduct gives 1.0 only
// when all pass.
double FormatReward(const FormatChecks& checks, FormatAggregation mode = FormatAggregation::kSum);

// Decodes an answer payload. offset_base is added to reported byte offsets.
std::variant<Localization, ParseError> DecodeAnswerPayload(std::string_view payload,
                                                           size_t offset_base = 0);

// Serializes a rollout into the canonical block layout. ParseRollout on the
// result (with the same token count) reproduces the rollout.
std::string CanonicalText(const Rollout& rollout);

uint64_t WhitespaceWordCount(std::string_view text);

// Returns the offset of the first invalid byte, or nullopt for valid UTF-8.
std::optional<size_t> FindInvalidUtf8(std::string_view text);

}  // namespace dpad

#endif  // DPAD_ROLLOUT_H_
