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

#include "dpad/reward_composer.h"

#include <cmath>
#include <set>
#include <unordered_set>

#include "dpad/error.h"
#include "dpad/parallel.h"

namespace dpad {
namespace {

using ojson = nlohmann::ordered_json;

void RequireFiniteNonNegative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw Error(ErrorCode::kInvalidConfig, std::string(name) + " must be finite and >= 0");
  }
}

double GetNumber(const nlohmann::json& j, const char* key) {
  if (!j[key].is_number()) {
    throw Error(ErrorCode::kInvalidConfig, std::string(key) + " must be a number");
  }
  return j[key].get<double>();
}

ComponentStats Stats(const std::vector<RewardBreakdown>& rows, double (*pick)(const RewardBreakdown&)) {
  ComponentStats s;
  if (rows.empty()) return s;
  double sum = 0.0;
  for (const auto& r : rows) sum += pick(r);
  s.mean = sum / static_cast<double>(rows.size());
  double sq = 0.0;
  for (const auto& r : rows) {
    const double d = pick(r) - s.mean;
    sq += d * d;
  }
  s.stddev = std::sqrt(sq / static_cast<double>(rows.size()));
  return s;
}

ojson StatsJson(const ComponentStats& s) { return ojson{{"mean", s.mean}, {"std", s.stddev}}; }

}  // namespace

void RewardConfig::Validate() const {
  RequireFiniteNonNegative(lambda_format, "lambda_format");
  RequireFiniteNonNegative(lambda_geo, "lambda_geo");
  RequireFiniteNonNegative(lambda_dpad, "lambda_dpad");
  if (lambda_format == 0.0 && lambda_geo == 0.0 && lambda_dpad == 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "at least one reward weight must be positive");
  }
  if (length_penalty_alpha) RequireFiniteNonNegative(*length_penalty_alpha, "length_penalty.alpha");
  if (!(tau_box > 0.0) || !std::isfinite(tau_box)) {
    throw Error(ErrorCode::kInvalidConfig, "tau_box must be positive");
  }
  if (!(tau_pt > 0.0) || !std::isfinite(tau_pt)) {
    throw Error(ErrorCode::kInvalidConfig, "tau_pt must be positive");
  }
}

RewardConfig RewardConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "reward config must be an object");
  static const std::set<std::string> kKnown = {
      "lambda_format", "lambda_geo", "lambda_dpad", "dpad_variant", "length_penalty",
      "tau_box",       "tau_pt",     "format_aggregation", "gate_on_format"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) throw Error(ErrorCode::kInvalidConfig, "unknown key: " + key);
  }
  RewardConfig cfg;
  if (j.contains("lambda_format")) cfg.lambda_format = GetNumber(j, "lambda_format");
  if (j.contains("lambda_geo")) cfg.lambda_geo = GetNumber(j, "lambda_geo");
  if (j.contains("lambda_dpad")) cfg.lambda_dpad = GetNumber(j, "lambda_dpad");
  if (j.contains("tau_box")) cfg.tau_box = GetNumber(j, "tau_box");
  if (j.contains("tau_pt")) cfg.tau_pt = GetNumber(j, "tau_pt");
  if (j.contains("dpad_variant")) {
    const auto v = j["dpad_variant"].is_string()
                       ? ParseVariant(j["dpad_variant"].get<std::string>())
                       : std::nullopt;
    if (!v) throw Error(ErrorCode::kInvalidConfig, "dpad_variant must be binary|difference|scaled|off");
    cfg.dpad_variant = *v;
  }
  if (j.contains("length_penalty") && !j["length_penalty"].is_null()) {
    const auto& lp = j["length_penalty"];
    if (!lp.is_object() || !lp.contains("alpha")) {
      throw Error(ErrorCode::kInvalidConfig, "length_penalty must be {\"alpha\": number}");
    }
    cfg.length_penalty_alpha = GetNumber(lp, "alpha");
  }
  if (j.contains("format_aggregation")) {
    const auto& f = j["format_aggregation"];
    if (f == "sum") {
      cfg.format_aggregation = FormatAggregation::kSum;
    } else if (f == "product") {
      cfg.format_aggregation = FormatAggregation::kProduct;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "format_aggregation must be sum|product");
    }
  }
  if (j.contains("gate_on_format")) {
    if (!j["gate_on_format"].is_boolean()) {
      throw Error(ErrorCode::kInvalidConfig, "gate_on_format must be a boolean");
    }
    cfg.gate_on_format = j["gate_on_format"].get<bool>();
  }
  cfg.Validate();
  return cfg;
}

nlohmann::ordered_json RewardConfigToJson(const RewardConfig& cfg) {
  ojson j;
  j["lambda_format"] = cfg.lambda_format;
  j["lambda_geo"] = cfg.lambda_geo;
  j["lambda_dpad"] = cfg.lambda_dpad;
  j["dpad_variant"] = VariantName(cfg.dpad_variant);
  j["length_penalty"] =
      cfg.length_penalty_alpha ? ojson{{"alpha", *cfg.length_penalty_alpha}} : ojson(nullptr);
  j["tau_box"] = cfg.tau_box;
  j["tau_pt"] = cfg.tau_pt;
  j["format_aggregation"] =
      cfg.format_aggregation == FormatAggregation::kSum ? "sum" : "product";
  j["gate_on_format"] = cfg.gate_on_format;
  return j;
}

double LengthPenaltyTerm(uint64_t token_count, double alpha) {
  return alpha * static_cast<double>(token_count);
}

RewardBreakdown ComposeReward(std::string sample_id, const FormatChecks& checks,
                              const Rollout* rollout, const std::optional<ParseError>& parse_error,
                              const Localization& gt, const DiscriminativeScores* scores,
                              uint64_t token_count, const RewardConfig& cfg) {
  RewardBreakdown b;
  b.sample_id = std::move(sample_id);
  b.parse_error = parse_error;
  b.format = checks;
  b.format_score = FormatReward(checks, cfg.format_aggregation);
  b.token_count = token_count;

  const bool all_checks = checks.tags_ok && checks.json_ok && checks.caption_ok;
  if (rollout != nullptr && (!cfg.gate_on_format || all_checks)) {
    b.geo = GeoReward(rollout->answer, gt, {cfg.tau_box, cfg.tau_pt});
    b.geo_score = b.geo->score;
    if (cfg.dpad_variant != DpadVariant::kOff) {
      if (scores == nullptr) {
        throw Error(ErrorCode::kMissingEmbedding, b.sample_id + ": no discriminative scores");
      }
      b.dpad = *scores;
      b.dpad_score = VariantReward(*scores, cfg.dpad_variant);
    }
  }
  if (cfg.length_penalty_alpha) {
    b.length_penalty = LengthPenaltyTerm(token_count, *cfg.length_penalty_alpha);
  }
  b.r_final = cfg.lambda_format * b.format_score + cfg.lambda_geo * b.geo_score +
              cfg.lambda_dpad * b.dpad_score - b.length_penalty;
  return b;
}

RewardBreakdown ScoreRollout(const RawRollout& raw, const Localization& gt,
                             const EmbeddingStore* store, const RewardConfig& cfg) {
  const FormatChecks checks = CheckFormat(raw.text);
  ParseOutcome parsed = ParseRollout(raw);
  const Rollout* rollout = std::get_if<Rollout>(&parsed);
  std::optional<ParseError> error;
  if (const auto* e = std::get_if<ParseError>(&parsed)) error = *e;
  const uint64_t tokens = rollout != nullptr  ? rollout->token_count
                          : raw.token_count   ? *raw.token_count
                                              : WhitespaceWordCount(raw.text);

  std::optional<DiscriminativeScores> scores;
  if (rollout != nullptr && cfg.dpad_variant != DpadVariant::kOff) {
    const EmbeddingRecord* roles[3] = {nullptr, nullptr, nullptr};
    const Role wanted[3] = {Role::kCaption, Role::kRoi, Role::kAoi};
    for (int i = 0; i < 3; ++i) {
      roles[i] = store != nullptr ? store->Find(raw.sample_id, wanted[i]) : nullptr;
      if (roles[i] == nullptr) {
        throw Error(ErrorCode::kMissingEmbedding, EmbeddingKey(raw.sample_id, wanted[i]));
      }
    }
    scores = ComputeDiscriminativeScores(*roles[0], *roles[1], *roles[2]);
  }
  return ComposeReward(raw.sample_id, checks, rollout, error, gt,
                       scores ? &*scores : nullptr, tokens, cfg);
}

BatchResult ScoreBatch(std::span<const RawRollout> dump, const GroundTruthIndex& gt,
                       const EmbeddingStore* store, const RewardConfig& cfg, size_t threads) {
  cfg.Validate();
  std::vector<std::optional<RewardBreakdown>> slots(dump.size());
  std::vector<std::string> failures(dump.size());

  std::unordered_set<std::string_view> seen;
  std::vector<bool> duplicate(dump.size(), false);
  for (size_t i = 0; i < dump.size(); ++i) {
    duplicate[i] = !seen.insert(dump[i].sample_id).second;
  }

  ParallelFor(dump.size(), threads, [&](size_t i) {
    const RawRollout& raw = dump[i];
    if (duplicate[i]) {
      failures[i] = "duplicate sample_id";
      return;
    }
    const auto it = gt.find(raw.sample_id);
    if (it == gt.end()) {
      failures[i] = std::string(ErrorCodeName(ErrorCode::kMissingGroundTruth)) + ": " + raw.sample_id;
      return;
    }
    try {
      slots[i] = ScoreRollout(raw, it->second, store, cfg);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  BatchResult result;
  for (size_t i = 0; i < dump.size(); ++i) {
    if (slots[i]) {
      result.breakdowns.push_back(std::move(*slots[i]));
    } else {
      result.errors.push_back({i, dump[i].sample_id, failures[i]});
    }
  }
  const auto& rows = result.breakdowns;
  result.summary.n = rows.size();
  result.summary.format = Stats(rows, [](const RewardBreakdown& b) { return b.format_score; });
  result.summary.geo = Stats(rows, [](const RewardBreakdown& b) { return b.geo_score; });
  result.summary.dpad = Stats(rows, [](const RewardBreakdown& b) { return b.dpad_score; });
  result.summary.length_penalty =
      Stats(rows, [](const RewardBreakdown& b) { return b.length_penalty; });
  result.summary.r_final = Stats(rows, [](const RewardBreakdown& b) { return b.r_final; });
  return result;
}

nlohmann::ordered_json BreakdownToJson(const RewardBreakdown& b) {
  ojson j;
  j["sample_id"] = b.sample_id;
  j["parsed"] = !b.parse_error.has_value();
  if (b.parse_error) {
    const ParseError& e = *b.parse_error;
    j["parse_error"] = ojson{{"kind", ParseErrorKindName(e.kind)},
                             {"which", e.which},
                             {"offset", e.offset ? ojson(*e.offset) : ojson(nullptr)}};
  } else {
    j["parse_error"] = nullptr;
  }
  j["format"] = ojson{{"tags_ok", b.format.tags_ok},
                      {"json_ok", b.format.json_ok},
                      {"caption_ok", b.format.caption_ok},
                      {"score", b.format_score}};
  if (b.geo) {
    const GeoBreakdown& g = *b.geo;
    j["geo"] = ojson{{"iou", g.iou},
                     {"iou_reward", g.iou_reward},
                     {"l1_bbox", g.l1_box},
                     {"l1_bbox_reward", g.l1_box_reward},
                     {"l1_points", g.l1_points},
                     {"l1_points_reward", g.l1_points_reward},
                     {"score", b.geo_score}};
  } else {
    j["geo"] = ojson{{"score", b.geo_score}};
  }
  ojson dpad;
  if (b.dpad) {
    dpad["s1"] = b.dpad->s1;
    dpad["s2"] = b.dpad->s2;
    dpad["delta"] = b.dpad->delta;
    dpad["r_dpad"] = b.dpad->r_dpad;
  }
  dpad["score"] = b.dpad_score;
  j["dpad"] = dpad;
  j["length_penalty"] = b.length_penalty;
  j["token_count"] = b.token_count;
  j["r_final"] = b.r_final;
  return j;
}

nlohmann::ordered_json SummaryToJson(const BatchResult& result) {
  ojson j;
  j["n"] = result.summary.n;
  j["n_errors"] = result.errors.size();
  ojson errors = ojson::array();
  for (const RecordError& e : result.errors) {
    errors.push_back(ojson{{"index", e.index}, {"sample_id", e.sample_id}, {"error", e.message}});
  }
  j["errors"] = errors;
  ojson components = ojson::object();
  if (result.summary.n > 0) {
    components["format"] = StatsJson(result.summary.format);
    components["geo"] = StatsJson(result.summary.geo);
    components["dpad"] = StatsJson(result.summary.dpad);
    components["length_penalty"] = StatsJson(result.summary.length_penalty);
    components["r_final"] = StatsJson(result.summary.r_final);
  }
  j["components"] = components;
  return j;
}

}  // namespace dpad
