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

// Composite reward: weighted sum of the format, geometric, and
// discriminative rewards, with an optional linear length penalty.

#ifndef DPAD_REWARD_COMPOSER_H_
#define DPAD_REWARD_COMPOSER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpad/embedding_store.h"
#include "dpad/geometry.h"
#include "dpad/rollout.h"
#include "dpad/semantics.h"
#include "json.hpp"

namespace dpad {

struct RewardConfig {
  double lambda_format = 1.0;
  double lambda_geo = 1.0;
  double lambda_dpad = 1.0;
  DpadVariant dpad_variant = DpadVariant::kBinary;
  // Not part of the original reward; disabled unless set.
  std::optional<double> length_penalty_alpha;
  double tau_box = 10.0;
  double tau_pt = 10.0;
  FormatAggregation format_aggregation = FormatAggregation::kSum;
  // When set, geo and dpad are zeroed unless every format check passes.
  // Parse failures always zero them.
  bool gate_on_format = false;

  // Throws kInvalidConfig.
  void Validate() const;
};

RewardConfig RewardConfigFromJson(const nlohmann::json& j);
nlohmann::ordered_json RewardConfigToJson(const RewardConfig& cfg);

struct RewardBreakdown {
  std::string sample_id;
  std::optional<ParseError> parse_error;
  FormatChecks format;
  double format_score = 0.0;
  std::optional<GeoBreakdown> geo;  // absent when not evaluated
  double geo_score = 0.0;
  std::optional<DiscriminativeScores> dpad;
  double dpad_score = 0.0;
  double length_penalty = 0.0;
  uint64_t token_count = 0;
  double r_final = 0.0;
};

double LengthPenaltyTerm(uint64_t token_count, double alpha);

// Lower-level entry point shared with the toy trainer. `rollout` is null on
// parse failure; `scores` may be null only when the variant is kOff or the
// rollout failed to parse.
RewardBreakdown ComposeReward(std::string sample_id, const FormatChecks& checks,
                              const Rollout* rollout, const std::optional<ParseError>& parse_error,
                              const Localization& gt, const DiscriminativeScores* scores,
                              uint64_t token_count, const RewardConfig& cfg);

// Parses and scores one raw rollout. Embeddings are looked up as
// {sample_id}/{caption,roi,aoi}; `store` may be null when the variant is
// kOff. Throws kMissingEmbedding when a parsed rollout lacks a role.
RewardBreakdown ScoreRollout(const RawRollout& raw, const Localization& gt,
                             const EmbeddingStore* store, const RewardConfig& cfg);

struct ComponentStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct BatchSummary {
  size_t n = 0;
  ComponentStats format;
  ComponentStats geo;
  ComponentStats dpad;
  ComponentStats length_penalty;
  ComponentStats r_final;
};

struct RecordError {
  size_t index = 0;
  std::string sample_id;
  std::string message;
};

struct BatchResult {
  std::vector<RewardBreakdown> breakdowns;  // input order, failed records skipped
  std::vector<RecordError> errors;
  BatchSummary summary;
};

using GroundTruthIndex = std::unordered_map<std::string, Localization>;

// Per-record failures (missing ground truth, missing embeddings, duplicate
// ids) are collected in `errors` and do not stop the batch.
BatchResult ScoreBatch(std::span<const RawRollout> dump, const GroundTruthIndex& gt,
                       const EmbeddingStore* store, const RewardConfig& cfg, size_t threads = 1);

// Stable key order; floats print as shortest round-trip decimals.
nlohmann::ordered_json BreakdownToJson(const RewardBreakdown& b);
nlohmann::ordered_json SummaryToJson(const BatchResult& result);

}  // namespace dpad

#endif  // DPAD_REWARD_COMPOSER_H_
