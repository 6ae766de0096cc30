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

#include <array>
#include <cmath>
#include <string>

#include "dpad/rollout.h"
#include "json.hpp"

namespace dpad {
namespace {

using json = nlohmann::json;

// Deeper payloads are rejected before they reach the JSON parser.
constexpr int kMaxPayloadDepth = 32;

enum TagIndex { kOpenThink, kCloseThink, kOpenAnswer, kCloseAnswer, kOpenCaption, kCloseCaption };

constexpr std::array<std::string_view, 6> kTags = {
    "<think>", "</think>", "<answer>", "</answer>", "<caption>", "</caption>",
};
constexpr std::array<std::string_view, 3> kBlockNames = {"think", "answer", "caption"};

struct TagScan {
  std::array<size_t, 6> count{};
  std::array<size_t, 6> first{};
  std::array<size_t, 6> second{};
};

TagScan ScanTags(std::string_view text) {
  TagScan scan;
  for (size_t t = 0; t < kTags.size(); ++t) {
    size_t pos = text.find(kTags[t]);
    while (pos != std::string_view::npos) {
      if (scan.count[t] == 0) scan.first[t] = pos;
      if (scan.count[t] == 1) scan.second[t] = pos;
      ++scan.count[t];
      pos = text.find(kTags[t], pos + kTags[t].size());
    }
  }
  return scan;
}

struct Block {
  size_t inner_begin;
  std::string_view inner;
};

// First open tag and the first matching close tag after it.
std::optional<Block> LocateBlock(std::string_view text, TagIndex open) {
  const std::string_view open_tag = kTags[open];
  const std::string_view close_tag = kTags[open + 1];
  const size_t o = text.find(open_tag);
  if (o == std::string_view::npos) return std::nullopt;
  const size_t begin = o + open_tag.size();
  const size_t c = text.find(close_tag, begin);
  if (c == std::string_view::npos) return std::nullopt;
  return Block{begin, text.substr(begin, c - begin)};
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool IsBlank(std::string_view s) {
  for (char c : s) {
    if (!IsSpace(c)) return false;
  }
  return true;
}

ParseError MakeError(ParseErrorKind kind, std::string which, std::optional<size_t> offset,
                     std::string message) {
  return ParseError{kind, std::move(which), offset, std::move(message)};
}

// Bracket depth outside of string literals.
bool ExceedsDepth(std::string_view payload) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (char c : payload) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      if (++depth > kMaxPayloadDepth) return true;
    } else if (c == ']' || c == '}') {
      --depth;
    }
  }
  return false;
}

template <size_t N>
std::optional<std::array<double, N>> NumberArray(const json& value) {
  if (!value.is_array() || value.size() != N) return std::nullopt;
  std::array<double, N> out{};
  for (size_t i = 0; i < N; ++i) {
    if (!value[i].is_number()) return std::nullopt;
    out[i] = value[i].get<double>();
    if (!std::isfinite(out[i])) return std::nullopt;
  }
  return out;
}

json PointJson(const KeyPoint& p) { return json::array({p.x, p.y}); }

}  // namespace

std::string_view ParseErrorKindName(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kInvalidUtf8: return "InvalidUtf8";
    case ParseErrorKind::kMissingTag: return "MissingTag";
    case ParseErrorKind::kTagOrderViolation: return "TagOrderViolation";
    case ParseErrorKind::kPayloadSyntaxError: return "PayloadSyntaxError";
    case ParseErrorKind::kMissingKey: return "MissingKey";
    case ParseErrorKind::kMalformedValue: return "MalformedValue";
  }
  return "Unknown";
}

std::string ParseError::ToString() const {
  std::string s(ParseErrorKindName(kind));
  if (!which.empty()) s += "(" + which + ")";
  if (offset) s += " at byte " + std::to_string(*offset);
  if (!message.empty()) s += ": " + message;
  return s;
}

std::optional<size_t> FindInvalidUtf8(std::string_view text) {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const size_t n = text.size();
  size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    size_t len = 0;
    uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    // Overlong forms, surrogates, and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return i;
    }
    i += len;
  }
  return std::nullopt;
}

uint64_t WhitespaceWordCount(std::string_view text) {
  uint64_t words = 0;
  bool in_word = false;
  for (char c : text) {
    if (IsSpace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

std::variant<Localization, ParseError> DecodeAnswerPayload(std::string_view payload,
                                                           size_t offset_base) {
  if (ExceedsDepth(payload)) {
    return MakeError(ParseErrorKind::kPayloadSyntaxError, "answer", offset_base,
                     "payload nesting deeper than " + std::to_string(kMaxPayloadDepth));
  }
  json doc;
  try {
    doc = json::parse(payload.begin(), payload.end());
  } catch (const json::parse_error& e) {
    const size_t at = e.byte > 0 ? e.byte - 1 : 0;
    return MakeError(ParseErrorKind::kPayloadSyntaxError, "answer", offset_base + at, e.what());
  } catch (const json::exception& e) {
    return MakeError(ParseErrorKind::kPayloadSyntaxError, "answer", offset_base, e.what());
  }
  if (!doc.is_object()) {
    return MakeError(ParseErrorKind::kPayloadSyntaxError, "answer", offset_base,
                     "payload is not a JSON object");
  }
  for (const char* key : {"bbox", "points_1", "points_2"}) {
    if (!doc.contains(key)) {
      return MakeError(ParseErrorKind::kMissingKey, key, offset_base, "required key absent");
    }
  }
  const auto box = NumberArray<4>(doc["bbox"]);
  if (!box) {
    return MakeError(ParseErrorKind::kMalformedValue, "bbox", offset_base,
                     "expected 4 finite numbers");
  }
  Localization loc;
  loc.bbox = {(*box)[0], (*box)[1], (*box)[2], (*box)[3]};
  if (!loc.bbox.IsValid()) {
    return MakeError(ParseErrorKind::kMalformedValue, "bbox", offset_base,
                     "expected x2 > x1 and y2 > y1");
  }
  const auto p1 = NumberArray<2>(doc["points_1"]);
  if (!p1) {
    return MakeError(ParseErrorKind::kMalformedValue, "points_1", offset_base,
                     "expected 2 finite numbers");
  }
  const auto p2 = NumberArray<2>(doc["points_2"]);
  if (!p2) {
    return MakeError(ParseErrorKind::kMalformedValue, "points_2", offset_base,
                     "expected 2 finite numbers");
  }
  loc.p1 = {(*p1)[0], (*p1)[1]};
  loc.p2 = {(*p2)[0], (*p2)[1]};
  return loc;
}

ParseOutcome ParseRollout(const RawRollout& raw) {
  const std::string_view text = raw.text;
  if (const auto bad = FindInvalidUtf8(text)) {
    return MakeError(ParseErrorKind::kInvalidUtf8, "", bad, "text is not valid UTF-8");
  }

  const TagScan scan = ScanTags(text);
  for (size_t b = 0; b < kBlockNames.size(); ++b) {
    if (scan.count[2 * b] == 0 || scan.count[2 * b + 1] == 0) {
      const size_t missing = scan.count[2 * b] == 0 ? 2 * b : 2 * b + 1;
      return MakeError(ParseErrorKind::kMissingTag, std::string(kBlockNames[b]), std::nullopt,
                       std::string(kTags[missing]) + " not found");
    }
  }
  for (size_t t = 0; t < kTags.size(); ++t) {
    if (scan.count[t] > 1) {
      return MakeError(ParseErrorKind::kTagOrderViolation, std::string(kBlockNames[t / 2]),
                       scan.second[t], std::string(kTags[t]) + " appears more than once");
    }
  }
  for (size_t t = 1; t < kTags.size(); ++t) {
    if (scan.first[t] < scan.first[t - 1]) {
      return MakeError(ParseErrorKind::kTagOrderViolation, std::string(kBlockNames[t / 2]),
                       scan.first[t],
                       std::string(kTags[t]) + " precedes " + std::string(kTags[t - 1]));
    }
  }

  auto span_of = [&](TagIndex open) {
    const size_t begin = scan.first[open] + kTags[open].size();
    return Block{begin, text.substr(begin, scan.first[open + 1] - begin)};
  };
  const Block think = span_of(kOpenThink);
  const Block answer = span_of(kOpenAnswer);
  const Block caption = span_of(kOpenCaption);

  auto decoded = DecodeAnswerPayload(answer.inner, answer.inner_begin);
  if (auto* err = std::get_if<ParseError>(&decoded)) return std::move(*err);

  Rollout rollout;
  rollout.sample_id = raw.sample_id;
  rollout.think = std::string(think.inner);
  rollout.answer = std::get<Localization>(decoded);
  rollout.caption = std::string(caption.inner);
  rollout.token_count = raw.token_count ? *raw.token_count : WhitespaceWordCount(text);
  return rollout;
}

FormatChecks CheckFormat(std::string_view text) {
  FormatChecks checks;
  const TagScan scan = ScanTags(text);
  bool tags = true;
  for (size_t t = 0; t < kTags.size(); ++t) tags = tags && scan.count[t] == 1;
  for (size_t t = 1; tags && t < kTags.size(); ++t) tags = scan.first[t - 1] < scan.first[t];
  checks.tags_ok = tags;

  if (const auto answer = LocateBlock(text, kOpenAnswer)) {
    checks.json_ok = std::holds_alternative<Localization>(
        DecodeAnswerPayload(answer->inner, answer->inner_begin));
  }
  if (const auto caption = LocateBlock(text, kOpenCaption)) {
    checks.caption_ok = !IsBlank(caption->inner);
  }
  return checks;
}

double FormatReward(const FormatChecks& checks, FormatAggregation mode) {
  const double tags = checks.tags_ok ? 1.0 : 0.0;
  const double payload = checks.json_ok ? 1.0 : 0.0;
  const double caption = checks.caption_ok ? 1.0 : 0.0;
  if (mode == FormatAggregation::kProduct) return tags * payload * caption;
  return tags + payload + caption;
}

std::string CanonicalText(const Rollout& rollout) {
  const Localization& a = rollout.answer;
  json payload = json::object();
  payload["bbox"] = json::array({a.bbox.x1, a.bbox.y1, a.bbox.x2, a.bbox.y2});
  payload["points_1"] = PointJson(a.p1);
  payload["points_2"] = PointJson(a.p2);
  return "<think>" + rollout.think + "</think>\n<answer>" + payload.dump() +
         "</answer>\n<caption>" + rollout.caption + "</caption>";
}

}  // namespace dpad
