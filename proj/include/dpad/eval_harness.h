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

// Dataset-level segmentation and discrimination metrics.
//
//   gIoU  mean of per-sample IoUs
//   cIoU  total intersection / total union
//   SNR   mean over samples of s1 / s2 (caption vs crop, caption vs image)
//   TSNR  the same for the reasoning text
//
// Per-sample ratios are averaged; the ratio of the mean similarities is
// reported alongside so both aggregations can be inspected.

#ifndef DPAD_EVAL_HARNESS_H_
#define DPAD_EVAL_HARNESS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpad/geometry.h"
#include "json.hpp"

namespace dpad {

struct Strata {
  std::optional<std::string> query_type;
  std::optional<std::string> difficulty;
};

enum class StrataAxis { kQueryType, kDifficulty };

std::string_view AxisName(StrataAxis axis);
std::optional<StrataAxis> ParseAxis(std::string_view name);

// Where a sample's overlap counts came from.
enum class IouSource {
  kMask,       // predicted and ground-truth masks
  kBoxRaster,  // predicted box rasterized into the ground-truth mask frame
  kBox,        // analytic box overlap, no masks available
  kMissing,    // no usable prediction; scored as zero intersection
};

std::string_view IouSourceName(IouSource source);

struct EvalInput {
  std::string sample_id;
  std::optional<MaskRLE> gt_mask;
  std::optional<MaskRLE> pred_mask;
  std::optional<BBox> gt_bbox;
  std::optional<BBox> pred_bbox;
  std::optional<double> s1, s2;
  std::optional<double> ts1, ts2;
  std::optional<uint64_t> token_count;
  Strata strata;
};

struct SampleEval {
  std::string sample_id;
  double iou = 0.0;
  double intersection = 0.0;
  double union_ = 0.0;
  IouSource source = IouSource::kMissing;
  std::optional<double> s1, s2, snr;
  std::optional<double> ts1, ts2, tsnr;
  std::optional<uint64_t> token_count;
  Strata strata;
};

// Throws kSchemaMismatch when the input carries neither a ground-truth mask
// nor a ground-truth box, and kShapeMismatch / kMalformedRle on bad masks.
SampleEval EvaluateSample(const EvalInput& input);

// Throws kEmptyInput.
double GIoU(std::span<const double> ious);

// Throws kEmptyInput or kShapeMismatch.
double CIoU(std::span<const std::pair<MaskRLE, MaskRLE>> pred_gt_pairs);

struct SnrStats {
  size_t n = 0;
  double mean_s1 = 0.0;
  double mean_s2 = 0.0;
  double mean_snr = 0.0;        // mean of per-sample s1 / s2
  double ratio_of_means = 0.0;  // mean_s1 / mean_s2
};

struct SimilarityPair {
  std::string sample_id;
  double s1 = 0.0;
  double s2 = 0.0;
};

// Throws kEmptyInput, or kNonPositiveDenominator naming the first sample
// with s2 <= 0.
SnrStats ComputeSnrStats(std::span<const SimilarityPair> samples);

struct TokenStats {
  size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// Throws kEmptyInput.
TokenStats ComputeTokenStats(std::span<const uint64_t> counts);

// (mean_a - mean_b) / mean_a * 100.
double TokenReductionPercent(double mean_a, double mean_b);

struct EvalReport {
  size_t n = 0;
  double giou = 0.0;
  double ciou = 0.0;
  std::vector<std::string> fallback_ids;  // samples not scored from two masks
  std::optional<SnrStats> snr;
  std::optional<SnrStats> tsnr;
  std::optional<TokenStats> tokens;
  // axis name -> stratum label -> sub-report (sub-reports have no strata).
  std::map<std::string, std::map<std::string, EvalReport>> strata;
};

// Throws kEmptyInput on no samples.
EvalReport BuildReport(std::span<const SampleEval> samples,
                       std::span<const StrataAxis> axes = {});

// Unlabeled samples land in "unlabeled"; empty strata are omitted.
std::map<std::string, EvalReport> StratifiedReport(std::span<const SampleEval> samples,
                                                   StrataAxis axis);

struct MetricDelta {
  std::string metric;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // a - b
};

struct Comparison {
  std::vector<MetricDelta> overall;
  std::map<std::string, std::map<std::string, std::vector<MetricDelta>>> strata;
  std::optional<double> token_reduction_percent;  // from a to b
};

// Throws kSchemaMismatch when one report carries a metric the other lacks.
// Strata present in only one report are skipped.
Comparison Compare(const EvalReport& a, const EvalReport& b);

nlohmann::ordered_json ReportToJson(const EvalReport& report);
EvalReport ReportFromJson(const nlohmann::json& j);
nlohmann::ordered_json ComparisonToJson(const Comparison& c);

// Aligned text tables; similarities are shown x100.
std::string RenderReportTable(const EvalReport& report);
std::string RenderComparisonTable(const Comparison& c);

// One row per sample for external plotting.
std::string SamplesToCsv(std::span<const SampleEval> samples);

}  // namespace dpad

#endif  // DPAD_EVAL_HARNESS_H_
