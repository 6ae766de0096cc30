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

#include "dpad/eval_harness.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "dpad/error.h"

namespace dpad {
namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr double kDisplayScale = 100.0;

std::optional<std::string> LabelOn(const Strata& s, StrataAxis axis) {
  return axis == StrataAxis::kQueryType ? s.query_type : s.difficulty;
}

ojson OptionalNumber(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson SnrJson(const std::optional<SnrStats>& s, const char* a, const char* b, const char* ratio) {
  if (!s) return nullptr;
  return ojson{{"n", s->n},
               {a, s->mean_s1},
               {b, s->mean_s2},
               {ratio, s->mean_snr},
               {"ratio_of_means", s->ratio_of_means}};
}

std::optional<SnrStats> SnrFromJson(const json& j, const char* a, const char* b, const char* ratio) {
  if (j.is_null()) return std::nullopt;
  SnrStats s;
  s.n = j.at("n").get<size_t>();
  s.mean_s1 = j.at(a).get<double>();
  s.mean_s2 = j.at(b).get<double>();
  s.mean_snr = j.at(ratio).get<double>();
  s.ratio_of_means = j.at("ratio_of_means").get<double>();
  return s;
}

// Flat metric list in a fixed order; absent metrics are nullopt.
std::vector<std::pair<std::string, std::optional<double>>> Metrics(const EvalReport& r) {
  auto from = [](const auto& opt, auto field) -> std::optional<double> {
    if (!opt) return std::nullopt;
    return static_cast<double>((*opt).*field);
  };
  return {
      {"n", static_cast<double>(r.n)},
      {"giou", r.giou},
      {"ciou", r.ciou},
      {"mean_s1", from(r.snr, &SnrStats::mean_s1)},
      {"mean_s2", from(r.snr, &SnrStats::mean_s2)},
      {"mean_snr", from(r.snr, &SnrStats::mean_snr)},
      {"snr_ratio_of_means", from(r.snr, &SnrStats::ratio_of_means)},
      {"mean_ts1", from(r.tsnr, &SnrStats::mean_s1)},
      {"mean_ts2", from(r.tsnr, &SnrStats::mean_s2)},
      {"mean_tsnr", from(r.tsnr, &SnrStats::mean_snr)},
      {"tsnr_ratio_of_means", from(r.tsnr, &SnrStats::ratio_of_means)},
      {"mean_tokens", from(r.tokens, &TokenStats::mean)},
      {"std_tokens", from(r.tokens, &TokenStats::stddev)},
  };
}

std::vector<MetricDelta> Deltas(const EvalReport& a, const EvalReport& b, const std::string& where) {
  const auto ma = Metrics(a);
  const auto mb = Metrics(b);
  std::vector<MetricDelta> out;
  for (size_t i = 0; i < ma.size(); ++i) {
    const auto& [name, va] = ma[i];
    const auto& vb = mb[i].second;
    if (va.has_value() != vb.has_value()) {
      throw Error(ErrorCode::kSchemaMismatch, where + ": metric " + name + " present in only one report");
    }
    if (va) out.push_back({name, *va, *vb, *va - *vb});
  }
  return out;
}

// Metrics shown x100 in rendered tables.
bool IsSimilarity(const std::string& metric) {
  return metric == "mean_s1" || metric == "mean_s2" || metric == "mean_ts1" || metric == "mean_ts2";
}

std::string Fmt(const std::string& metric, double v) {
  char buf[64];
  if (IsSimilarity(metric)) {
    std::snprintf(buf, sizeof(buf), "%.2f", v * kDisplayScale);
  } else if (metric == "n") {
    std::snprintf(buf, sizeof(buf), "%.0f", v);
  } else if (metric == "mean_tokens" || metric == "std_tokens" || metric == "token_reduction_%") {
    std::snprintf(buf, sizeof(buf), "%.2f", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.4f", v);
  }
  return buf;
}

std::string RenderRows(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        line += row[c] + std::string(width[c] - row[c].size(), ' ');
      } else {
        line += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string DisplayName(const std::string& metric) {
  if (IsSimilarity(metric)) return metric + " (x100)";
  return metric;
}

void AppendCsvNumber(std::string& out, const std::optional<double>& v) {
  if (!v) return;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), *v);
  out.append(buf, res.ptr);
}

void AppendCsvText(std::string& out, const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

std::string_view AxisName(StrataAxis axis) {
  return axis == StrataAxis::kQueryType ? "query_type" : "difficulty";
}

std::optional<StrataAxis> ParseAxis(std::string_view name) {
  if (name == "query_type") return StrataAxis::kQueryType;
  if (name == "difficulty") return StrataAxis::kDifficulty;
  return std::nullopt;
}

std::string_view IouSourceName(IouSource source) {
  switch (source) {
    case IouSource::kMask: return "mask";
    case IouSource::kBoxRaster: return "bbox_raster";
    case IouSource::kBox: return "bbox";
    case IouSource::kMissing: return "missing";
  }
  return "unknown";
}

SampleEval EvaluateSample(const EvalInput& in) {
  SampleEval s;
  s.sample_id = in.sample_id;
  s.s1 = in.s1;
  s.s2 = in.s2;
  s.ts1 = in.ts1;
  s.ts2 = in.ts2;
  s.token_count = in.token_count;
  s.strata = in.strata;
  if (in.s1 && in.s2 && *in.s2 > 0.0) s.snr = *in.s1 / *in.s2;
  if (in.ts1 && in.ts2 && *in.ts2 > 0.0) s.tsnr = *in.ts1 / *in.ts2;

  if (in.gt_mask) {
    simd::OverlapCounts c;
    if (in.pred_mask) {
      c = RleOverlap(*in.pred_mask, *in.gt_mask);
      s.source = IouSource::kMask;
    } else if (in.pred_bbox) {
      const Bitmap gt = RleDecode(*in.gt_mask);
      c = BitmapOverlap(RasterizeBox(*in.pred_bbox, gt.height, gt.width), gt);
      s.source = IouSource::kBoxRaster;
    } else {
      c = {0, RleArea(*in.gt_mask)};
      s.source = IouSource::kMissing;
    }
    s.intersection = static_cast<double>(c.intersection);
    s.union_ = static_cast<double>(c.union_);
    s.iou = IouFromCounts(c);
    return s;
  }
  if (in.gt_bbox) {
    ValidateBox(*in.gt_bbox);
    if (in.pred_bbox) {
      ValidateBox(*in.pred_bbox);
      const BBox& a = *in.pred_bbox;
      const BBox& b = *in.gt_bbox;
      const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
      const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
      s.intersection = iw * ih;
      s.union_ = a.Area() + b.Area() - s.intersection;
      s.source = IouSource::kBox;
    } else {
      s.union_ = in.gt_bbox->Area();
      s.source = IouSource::kMissing;
    }
    s.iou = s.intersection / s.union_;
    return s;
  }
  throw Error(ErrorCode::kSchemaMismatch, in.sample_id + ": no ground-truth mask or box");
}

double GIoU(std::span<const double> ious) {
  if (ious.empty()) throw Error(ErrorCode::kEmptyInput, "gIoU of an empty set");
  double sum = 0.0;
  for (double v : ious) sum += v;
  return sum / static_cast<double>(ious.size());
}

double CIoU(std::span<const std::pair<MaskRLE, MaskRLE>> pred_gt_pairs) {
  if (pred_gt_pairs.empty()) throw Error(ErrorCode::kEmptyInput, "cIoU of an empty set");
  uint64_t inter = 0;
  uint64_t uni = 0;
  for (const auto& [pred, gt] : pred_gt_pairs) {
    const simd::OverlapCounts c = RleOverlap(pred, gt);
    inter += c.intersection;
    uni += c.union_;
  }
  return IouFromCounts({inter, uni});
}

SnrStats ComputeSnrStats(std::span<const SimilarityPair> samples) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "SNR of an empty set");
  SnrStats s;
  s.n = samples.size();
  double ratio_sum = 0.0;
  for (const SimilarityPair& p : samples) {
    if (!(p.s2 > 0.0)) throw Error(ErrorCode::kNonPositiveDenominator, p.sample_id);
    s.mean_s1 += p.s1;
    s.mean_s2 += p.s2;
    ratio_sum += p.s1 / p.s2;
  }
  const double n = static_cast<double>(s.n);
  s.mean_s1 /= n;
  s.mean_s2 /= n;
  s.mean_snr = ratio_sum / n;
  s.ratio_of_means = s.mean_s1 / s.mean_s2;
  return s;
}

TokenStats ComputeTokenStats(std::span<const uint64_t> counts) {
  if (counts.empty()) throw Error(ErrorCode::kEmptyInput, "token statistics of an empty dump");
  TokenStats t;
  t.n = counts.size();
  double sum = 0.0;
  for (uint64_t c : counts) sum += static_cast<double>(c);
  t.mean = sum / static_cast<double>(t.n);
  double sq = 0.0;
  for (uint64_t c : counts) {
    const double d = static_cast<double>(c) - t.mean;
    sq += d * d;
  }
  t.stddev = std::sqrt(sq / static_cast<double>(t.n));
  return t;
}

double TokenReductionPercent(double mean_a, double mean_b) {
  if (!(mean_a > 0.0)) throw Error(ErrorCode::kNonPositiveDenominator, "baseline token mean");
  return (mean_a - mean_b) / mean_a * 100.0;
}

EvalReport BuildReport(std::span<const SampleEval> samples, std::span<const StrataAxis> axes) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "no samples to report");
  EvalReport r;
  r.n = samples.size();
  std::vector<double> ious;
  std::vector<SimilarityPair> caption;
  std::vector<SimilarityPair> think;
  std::vector<uint64_t> tokens;
  double inter = 0.0;
  double uni = 0.0;
  for (const SampleEval& s : samples) {
    ious.push_back(s.iou);
    inter += s.intersection;
    uni += s.union_;
    if (s.source != IouSource::kMask) r.fallback_ids.push_back(s.sample_id);
    if (s.s1 && s.s2) caption.push_back({s.sample_id, *s.s1, *s.s2});
    if (s.ts1 && s.ts2) think.push_back({s.sample_id, *s.ts1, *s.ts2});
    if (s.token_count) tokens.push_back(*s.token_count);
  }
  r.giou = GIoU(ious);
  r.ciou = uni == 0.0 ? 1.0 : inter / uni;
  if (!caption.empty()) r.snr = ComputeSnrStats(caption);
  if (!think.empty()) r.tsnr = ComputeSnrStats(think);
  if (!tokens.empty()) r.tokens = ComputeTokenStats(tokens);
  for (StrataAxis axis : axes) r.strata[std::string(AxisName(axis))] = StratifiedReport(samples, axis);
  return r;
}

std::map<std::string, EvalReport> StratifiedReport(std::span<const SampleEval> samples,
                                                   StrataAxis axis) {
  std::map<std::string, std::vector<SampleEval>> buckets;
  for (const SampleEval& s : samples) {
    buckets[LabelOn(s.strata, axis).value_or("unlabeled")].push_back(s);
  }
  std::map<std::string, EvalReport> out;
  for (const auto& [label, members] : buckets) out.emplace(label, BuildReport(members));
  return out;
}

Comparison Compare(const EvalReport& a, const EvalReport& b) {
  Comparison c;
  c.overall = Deltas(a, b, "overall");
  if (a.tokens && b.tokens) c.token_reduction_percent = TokenReductionPercent(a.tokens->mean, b.tokens->mean);
  for (const auto& [axis, labels_a] : a.strata) {
    const auto it = b.strata.find(axis);
    if (it == b.strata.end()) continue;
    for (const auto& [label, sub_a] : labels_a) {
      const auto jt = it->second.find(label);
      if (jt == it->second.end()) continue;
      c.strata[axis][label] = Deltas(sub_a, jt->second, axis + "/" + label);
    }
  }
  return c;
}

nlohmann::ordered_json ReportToJson(const EvalReport& r) {
  ojson j;
  j["n"] = r.n;
  j["giou"] = r.giou;
  j["ciou"] = r.ciou;
  j["n_fallback"] = r.fallback_ids.size();
  j["fallback_ids"] = r.fallback_ids;
  j["snr"] = SnrJson(r.snr, "mean_s1", "mean_s2", "mean_snr");
  j["tsnr"] = SnrJson(r.tsnr, "mean_ts1", "mean_ts2", "mean_tsnr");
  j["tokens"] = r.tokens ? ojson{{"n", r.tokens->n}, {"mean", r.tokens->mean}, {"std", r.tokens->stddev}}
                         : ojson(nullptr);
  ojson strata = ojson::object();
  for (const auto& [axis, labels] : r.strata) {
    ojson per = ojson::object();
    for (const auto& [label, sub] : labels) per[label] = ReportToJson(sub);
    strata[axis] = per;
  }
  j["strata"] = strata;
  return j;
}

EvalReport ReportFromJson(const json& j) {
  try {
    EvalReport r;
    r.n = j.at("n").get<size_t>();
    r.giou = j.at("giou").get<double>();
    r.ciou = j.at("ciou").get<double>();
    r.fallback_ids = j.at("fallback_ids").get<std::vector<std::string>>();
    r.snr = SnrFromJson(j.at("snr"), "mean_s1", "mean_s2", "mean_snr");
    r.tsnr = SnrFromJson(j.at("tsnr"), "mean_ts1", "mean_ts2", "mean_tsnr");
    if (!j.at("tokens").is_null()) {
      const json& t = j["tokens"];
      r.tokens = TokenStats{t.at("n").get<size_t>(), t.at("mean").get<double>(), t.at("std").get<double>()};
    }
    for (const auto& [axis, labels] : j.at("strata").items()) {
      for (const auto& [label, sub] : labels.items()) r.strata[axis][label] = ReportFromJson(sub);
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("report document: ") + e.what());
  }
}

nlohmann::ordered_json ComparisonToJson(const Comparison& c) {
  auto rows = [](const std::vector<MetricDelta>& deltas) {
    ojson out = ojson::object();
    for (const MetricDelta& d : deltas) out[d.metric] = ojson{{"a", d.a}, {"b", d.b}, {"delta", d.delta}};
    return out;
  };
  ojson j;
  j["overall"] = rows(c.overall);
  j["token_reduction_percent"] = OptionalNumber(c.token_reduction_percent);
  ojson strata = ojson::object();
  for (const auto& [axis, labels] : c.strata) {
    ojson per = ojson::object();
    for (const auto& [label, deltas] : labels) per[label] = rows(deltas);
    strata[axis] = per;
  }
  j["strata"] = strata;
  return j;
}

std::string RenderReportTable(const EvalReport& r) {
  std::vector<std::vector<std::string>> rows = {{"metric", "value"}};
  for (const auto& [name, v] : Metrics(r)) {
    if (v) rows.push_back({DisplayName(name), Fmt(name, *v)});
  }
  rows.push_back({"mask_fallbacks", std::to_string(r.fallback_ids.size())});
  std::string out = RenderRows(rows);
  for (const auto& [axis, labels] : r.strata) {
    std::vector<std::vector<std::string>> srows = {{axis, "n", "giou", "ciou", "mean_tokens"}};
    for (const auto& [label, sub] : labels) {
      srows.push_back({label, std::to_string(sub.n), Fmt("giou", sub.giou), Fmt("ciou", sub.ciou),
                       sub.tokens ? Fmt("mean_tokens", sub.tokens->mean) : "-"});
    }
    out += "\n" + RenderRows(srows);
  }
  return out;
}

std::string RenderComparisonTable(const Comparison& c) {
  std::vector<std::vector<std::string>> rows = {{"metric", "a", "b", "delta"}};
  for (const MetricDelta& d : c.overall) {
    rows.push_back({DisplayName(d.metric), Fmt(d.metric, d.a), Fmt(d.metric, d.b), Fmt(d.metric, d.delta)});
  }
  if (c.token_reduction_percent) {
    rows.push_back({"token_reduction_%", "", "", Fmt("token_reduction_%", *c.token_reduction_percent)});
  }
  std::string out = RenderRows(rows);
  for (const auto& [axis, labels] : c.strata) {
    std::vector<std::vector<std::string>> srows = {{axis, "metric", "a", "b", "delta"}};
    for (const auto& [label, deltas] : labels) {
      for (const MetricDelta& d : deltas) {
        if (d.metric != "giou" && d.metric != "mean_tokens") continue;
        srows.push_back({label, d.metric, Fmt(d.metric, d.a), Fmt(d.metric, d.b), Fmt(d.metric, d.delta)});
      }
    }
    out += "\n" + RenderRows(srows);
  }
  return out;
}

std::string SamplesToCsv(std::span<const SampleEval> samples) {
  std::string out =
      "sample_id,iou,iou_source,intersection,union,s1,s2,snr,ts1,ts2,tsnr,token_count,"
      "query_type,difficulty\n";
  for (const SampleEval& s : samples) {
    AppendCsvText(out, s.sample_id);
    out += ',';
    AppendCsvNumber(out, s.iou);
    out += ',';
    out += IouSourceName(s.source);
    out += ',';
    AppendCsvNumber(out, s.intersection);
    out += ',';
    AppendCsvNumber(out, s.union_);
    for (const auto& v : {s.s1, s.s2, s.snr, s.ts1, s.ts2, s.tsnr}) {
      out += ',';
      AppendCsvNumber(out, v);
    }
    out += ',';
    if (s.token_count) out += std::to_string(*s.token_count);
    out += ',';
    AppendCsvText(out, s.strata.query_type.value_or(""));
    out += ',';
    AppendCsvText(out, s.strata.difficulty.value_or(""));
    out += '\n';
  }
  return out;
}

}  // namespace dpad
