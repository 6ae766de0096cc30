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

#include "dpad/io.h"

#include <unistd.h>

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dpad/error.h"

namespace dpad {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr size_t kMaxListedIds = 10;

// Location prefix for error messages.
class Where {
 public:
  Where(std::string_view source, size_t line) : source_(source), line_(line) {}

  [[noreturn]] void Fail(ErrorCode code, const std::string& msg) const {
    throw Error(code, std::string(source_) + ":" + std::to_string(line_) + ": " + msg);
  }
  [[noreturn]] void Fail(const std::string& msg) const { Fail(ErrorCode::kParseError, msg); }

 private:
  std::string_view source_;
  size_t line_;
};

// Calls fn(json, where) for each non-blank line.
template <typename Fn>
void ForEachRecord(std::string_view text, std::string_view source, Fn&& fn) {
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const Where where(source, line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      where.Fail(std::string("invalid JSON (") + e.what() + ")");
    }
    if (!j.is_object()) where.Fail("record is not a JSON object");
    fn(j, where);
  }
}

std::string RequireString(const json& j, const char* key, const Where& where) {
  const auto it = j.find(key);
  if (it == j.end()) where.Fail(std::string("missing \"") + key + "\"");
  if (!it->is_string()) where.Fail(std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::string RequireId(const json& j, const Where& where) {
  std::string id = RequireString(j, "sample_id", where);
  if (id.empty()) where.Fail("empty sample_id");
  return id;
}

std::optional<std::string> OptionalString(const json& j, const char* key, const Where& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) where.Fail(std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::optional<double> OptionalNumber(const json& j, const char* key, const Where& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) where.Fail(std::string("\"") + key + "\" must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) where.Fail(std::string("\"") + key + "\" is not finite");
  return v;
}

std::optional<uint64_t> OptionalCount(const json& j, const char* key, const Where& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_unsigned()) {
    where.Fail(std::string("\"") + key + "\" must be a non-negative integer");
  }
  return it->get<uint64_t>();
}

std::vector<double> NumberArray(const json& j, const char* key, size_t n, const Where& where) {
  const auto it = j.find(key);
  if (it == j.end()) where.Fail(std::string("missing \"") + key + "\"");
  if (!it->is_array() || it->size() != n) {
    where.Fail(std::string("\"") + key + "\" must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const json& v : *it) {
    if (!v.is_number()) where.Fail(std::string("\"") + key + "\" holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

BBox BoxField(const json& j, const char* key, const Where& where) {
  const std::vector<double> v = NumberArray(j, key, 4, where);
  const BBox box{v[0], v[1], v[2], v[3]};
  if (!box.IsValid()) where.Fail(ErrorCode::kInvalidBox, std::string("degenerate \"") + key + "\"");
  return box;
}

KeyPoint PointField(const json& j, const char* key, const Where& where) {
  const std::vector<double> v = NumberArray(j, key, 2, where);
  const KeyPoint p{v[0], v[1]};
  if (!p.IsValid()) where.Fail(std::string("non-finite \"") + key + "\"");
  return p;
}

std::optional<MaskRLE> MaskField(const json& j, const char* key, const Where& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return MaskFromJson(*it);
  } catch (const Error& e) {
    where.Fail(e.code(), std::string("\"") + key + "\": " + e.what());
  }
}

Strata StrataFields(const json& j, const Where& where) {
  Strata s;
  s.query_type = OptionalString(j, "query_type", where);
  s.difficulty = OptionalString(j, "difficulty", where);
  return s;
}

Strata StrataObject(const json& j, const Where& where) {
  const auto it = j.find("strata");
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_object()) where.Fail("\"strata\" must be an object");
  return StrataFields(*it, where);
}

void CheckUnique(std::unordered_set<std::string>& seen, const std::string& id, const Where& where) {
  if (!seen.insert(id).second) where.Fail(ErrorCode::kDuplicateKey, "duplicate sample_id " + id);
}

std::string ListIds(const std::vector<std::string>& ids) {
  std::string out;
  for (size_t i = 0; i < ids.size() && i < kMaxListedIds; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > kMaxListedIds) out += " and " + std::to_string(ids.size() - kMaxListedIds) + " more";
  return out;
}

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::string out((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path.string());
  return out;
}

void AtomicWrite(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIoError, "cannot create " + tmp.string());
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::kIoError, "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

MaskRLE MaskFromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedRle, "mask must be an object");
  auto dim = [&](const char* key) -> uint32_t {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_unsigned() || it->get<uint64_t>() > UINT32_MAX) {
      throw Error(ErrorCode::kMalformedRle, std::string("mask \"") + key + "\" must be a uint32");
    }
    return it->get<uint32_t>();
  };
  MaskRLE m;
  m.height = dim("h");
  m.width = dim("w");
  const auto it = j.find("counts");
  if (it == j.end() || !it->is_array()) {
    throw Error(ErrorCode::kMalformedRle, "mask \"counts\" must be an array");
  }
  for (const json& c : *it) {
    if (!c.is_number_unsigned() || c.get<uint64_t>() > UINT32_MAX) {
      throw Error(ErrorCode::kMalformedRle, "mask run lengths must be uint32");
    }
    m.counts.push_back(c.get<uint32_t>());
  }
  ValidateRle(m);
  return m;
}

ojson MaskToJson(const MaskRLE& mask) {
  return ojson{{"h", mask.height}, {"w", mask.width}, {"counts", mask.counts}};
}

std::vector<RawRollout> ParseRolloutDump(std::string_view text, std::string_view source) {
  std::vector<RawRollout> out;
  std::unordered_set<std::string> seen;
  ForEachRecord(text, source, [&](const json& j, const Where& where) {
    RawRollout r;
    r.sample_id = RequireId(j, where);
    CheckUnique(seen, r.sample_id, where);
    r.text = RequireString(j, "text", where);
    r.token_count = OptionalCount(j, "token_count", where);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<GroundTruthRecord> ParseGroundTruth(std::string_view text, std::string_view source) {
  std::vector<GroundTruthRecord> out;
  std::unordered_set<std::string> seen;
  ForEachRecord(text, source, [&](const json& j, const Where& where) {
    GroundTruthRecord g;
    g.sample_id = RequireId(j, where);
    CheckUnique(seen, g.sample_id, where);
    g.loc.bbox = BoxField(j, "gt_bbox", where);
    g.loc.p1 = PointField(j, "gt_p1", where);
    g.loc.p2 = PointField(j, "gt_p2", where);
    g.gt_mask = MaskField(j, "gt_mask", where);
    g.pred_mask = MaskField(j, "pred_mask", where);
    if (g.pred_mask && !g.gt_mask) where.Fail("\"pred_mask\" without \"gt_mask\"");
    if (g.gt_mask && g.pred_mask &&
        (g.gt_mask->height != g.pred_mask->height || g.gt_mask->width != g.pred_mask->width)) {
      where.Fail(ErrorCode::kShapeMismatch, "predicted and ground-truth masks differ in shape");
    }
    g.strata = StrataObject(j, where);
    out.push_back(std::move(g));
  });
  return out;
}

std::map<std::string, Strata> ParseStrata(std::string_view text, std::string_view source) {
  std::map<std::string, Strata> out;
  ForEachRecord(text, source, [&](const json& j, const Where& where) {
    std::string id = RequireId(j, where);
    const Strata s = StrataFields(j, where);
    if (!out.emplace(std::move(id), s).second) {
      where.Fail(ErrorCode::kDuplicateKey, "duplicate sample_id " + RequireId(j, where));
    }
  });
  return out;
}

std::vector<EvalInput> ParseEvalDump(std::string_view text, std::string_view source) {
  std::vector<EvalInput> out;
  std::unordered_set<std::string> seen;
  ForEachRecord(text, source, [&](const json& j, const Where& where) {
    EvalInput in;
    in.sample_id = RequireId(j, where);
    CheckUnique(seen, in.sample_id, where);
    in.gt_mask = MaskField(j, "gt_mask", where);
    in.pred_mask = MaskField(j, "pred_mask", where);
    if (j.contains("gt_bbox") && !j["gt_bbox"].is_null()) in.gt_bbox = BoxField(j, "gt_bbox", where);
    if (j.contains("pred_bbox") && !j["pred_bbox"].is_null()) {
      in.pred_bbox = BoxField(j, "pred_bbox", where);
    }
    if (!in.gt_mask && !in.gt_bbox) where.Fail("record needs \"gt_mask\" or \"gt_bbox\"");
    if (in.pred_mask && !in.gt_mask) where.Fail("\"pred_mask\" without \"gt_mask\"");
    if (in.gt_mask && in.pred_mask &&
        (in.gt_mask->height != in.pred_mask->height || in.gt_mask->width != in.pred_mask->width)) {
      where.Fail(ErrorCode::kShapeMismatch, "predicted and ground-truth masks differ in shape");
    }
    in.s1 = OptionalNumber(j, "s1", where);
    in.s2 = OptionalNumber(j, "s2", where);
    in.ts1 = OptionalNumber(j, "ts1", where);
    in.ts2 = OptionalNumber(j, "ts2", where);
    if (in.s1.has_value() != in.s2.has_value()) where.Fail("\"s1\" and \"s2\" must appear together");
    if (in.ts1.has_value() != in.ts2.has_value()) where.Fail("\"ts1\" and \"ts2\" must appear together");
    if (in.s2 && *in.s2 <= 0.0) where.Fail(ErrorCode::kNonPositiveDenominator, in.sample_id + ": s2 must be positive");
    if (in.ts2 && *in.ts2 <= 0.0) where.Fail(ErrorCode::kNonPositiveDenominator, in.sample_id + ": ts2 must be positive");
    in.token_count = OptionalCount(j, "token_count", where);
    in.strata = StrataObject(j, where);
    out.push_back(std::move(in));
  });
  return out;
}

std::vector<RawRollout> LoadRolloutDump(const std::filesystem::path& path) {
  return ParseRolloutDump(ReadFile(path), path.string());
}

std::vector<GroundTruthRecord> LoadGroundTruth(const std::filesystem::path& path) {
  return ParseGroundTruth(ReadFile(path), path.string());
}

std::map<std::string, Strata> LoadStrata(const std::filesystem::path& path) {
  return ParseStrata(ReadFile(path), path.string());
}

std::vector<EvalInput> LoadEvalDump(const std::filesystem::path& path) {
  return ParseEvalDump(ReadFile(path), path.string());
}

ojson EvalInputToJson(const EvalInput& in) {
  auto box = [](const BBox& b) { return ojson::array({b.x1, b.y1, b.x2, b.y2}); };
  ojson j;
  j["sample_id"] = in.sample_id;
  if (in.gt_bbox) j["gt_bbox"] = box(*in.gt_bbox);
  if (in.pred_bbox) j["pred_bbox"] = box(*in.pred_bbox);
  if (in.gt_mask) j["gt_mask"] = MaskToJson(*in.gt_mask);
  if (in.pred_mask) j["pred_mask"] = MaskToJson(*in.pred_mask);
  if (in.s1) j["s1"] = *in.s1;
  if (in.s2) j["s2"] = *in.s2;
  if (in.ts1) j["ts1"] = *in.ts1;
  if (in.ts2) j["ts2"] = *in.ts2;
  if (in.token_count) j["token_count"] = *in.token_count;
  if (in.strata.query_type || in.strata.difficulty) {
    ojson s = ojson::object();
    if (in.strata.query_type) s["query_type"] = *in.strata.query_type;
    if (in.strata.difficulty) s["difficulty"] = *in.strata.difficulty;
    j["strata"] = s;
  }
  return j;
}

std::vector<std::filesystem::path> BundlePaths::All() const {
  std::vector<std::filesystem::path> out = {rollouts, ground_truth};
  if (embeddings) out.push_back(*embeddings);
  if (strata) out.push_back(*strata);
  return out;
}

BundlePaths ReadBundlePaths(const std::filesystem::path& bundle_file) {
  const std::string text = ReadFile(bundle_file);
  const std::string name = bundle_file.string();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, name + ": invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw Error(ErrorCode::kParseError, name + ": bundle must be an object");
  static const std::set<std::string> kKeys = {"rollouts", "ground_truth", "embeddings", "strata"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorCode::kParseError, name + ": unknown key \"" + key + "\"");
    if (!value.is_string()) {
      throw Error(ErrorCode::kParseError, name + ": \"" + key + "\" must be a path string");
    }
  }
  for (const char* key : {"rollouts", "ground_truth"}) {
    if (!j.contains(key)) throw Error(ErrorCode::kParseError, name + ": missing \"" + key + "\"");
  }
  const std::filesystem::path base = bundle_file.parent_path();
  BundlePaths p;
  p.rollouts = Resolve(base, j["rollouts"].get<std::string>());
  p.ground_truth = Resolve(base, j["ground_truth"].get<std::string>());
  if (j.contains("embeddings")) p.embeddings = Resolve(base, j["embeddings"].get<std::string>());
  if (j.contains("strata")) p.strata = Resolve(base, j["strata"].get<std::string>());
  return p;
}

GroundTruthIndex DatasetBundle::GroundTruth() const {
  GroundTruthIndex index;
  for (const GroundTruthRecord& g : ground_truth) index.emplace(g.sample_id, g.loc);
  return index;
}

DatasetBundle LoadBundle(const std::filesystem::path& bundle_file, DpadVariant variant) {
  DatasetBundle b;
  b.paths = ReadBundlePaths(bundle_file);
  b.rollouts = LoadRolloutDump(b.paths.rollouts);
  b.ground_truth = LoadGroundTruth(b.paths.ground_truth);
  if (b.paths.embeddings) b.store = EmbeddingStore::Load(*b.paths.embeddings);
  if (b.paths.strata) b.strata = LoadStrata(*b.paths.strata);
  if (variant != DpadVariant::kOff && !b.store) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("variant ") + std::string(VariantName(variant)) +
                    " needs an embedding store in the bundle");
  }

  std::unordered_set<std::string> gt_ids;
  for (const GroundTruthRecord& g : b.ground_truth) gt_ids.insert(g.sample_id);
  std::vector<std::string> missing;
  std::unordered_set<std::string> rollout_ids;
  for (const RawRollout& r : b.rollouts) {
    rollout_ids.insert(r.sample_id);
    if (!gt_ids.contains(r.sample_id)) missing.push_back(r.sample_id);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kCrossRefError,
                "rollout ids absent from ground truth: " + ListIds(missing));
  }

  if (b.store && variant != DpadVariant::kOff) {
    for (const RawRollout& r : b.rollouts) {
      // Rollouts that fail to parse are never scored against embeddings.
      if (!std::holds_alternative<Rollout>(ParseRollout(r))) continue;
      for (Role role : {Role::kCaption, Role::kRoi, Role::kAoi}) {
        if (!b.store->Contains(r.sample_id, role)) b.coverage.missing_roles[role].push_back(r.sample_id);
      }
    }
  }
  for (const auto& [role, ids] : b.coverage.missing_roles) {
    b.coverage.warnings.push_back(std::to_string(ids.size()) + " parsed rollouts have no " +
                                  std::string(RoleName(role)) + " embedding: " + ListIds(ids));
  }
  std::vector<std::string> unused;
  for (const GroundTruthRecord& g : b.ground_truth) {
    if (!rollout_ids.contains(g.sample_id)) unused.push_back(g.sample_id);
  }
  if (!unused.empty()) {
    b.coverage.warnings.push_back(std::to_string(unused.size()) +
                                  " ground-truth records have no rollout: " + ListIds(unused));
  }
  std::vector<std::string> stray;
  for (const auto& [id, s] : b.strata) {
    if (!gt_ids.contains(id)) stray.push_back(id);
  }
  if (!stray.empty()) {
    b.coverage.warnings.push_back(std::to_string(stray.size()) +
                                  " strata labels match no ground truth: " + ListIds(stray));
  }
  return b;
}

std::vector<EvalInput> EvalInputsFromBundle(const DatasetBundle& bundle) {
  std::unordered_map<std::string, const GroundTruthRecord*> gt;
  for (const GroundTruthRecord& g : bundle.ground_truth) gt.emplace(g.sample_id, &g);
  const EmbeddingStore* store = bundle.store ? &*bundle.store : nullptr;

  std::vector<EvalInput> out;
  out.reserve(bundle.rollouts.size());
  for (const RawRollout& raw : bundle.rollouts) {
    const auto it = gt.find(raw.sample_id);
    if (it == gt.end()) throw Error(ErrorCode::kCrossRefError, raw.sample_id);
    const GroundTruthRecord& g = *it->second;
    EvalInput in;
    in.sample_id = raw.sample_id;
    in.gt_mask = g.gt_mask;
    in.pred_mask = g.pred_mask;
    in.gt_bbox = g.loc.bbox;
    in.strata = g.strata;
    if (const auto s = bundle.strata.find(raw.sample_id); s != bundle.strata.end()) {
      if (s->second.query_type) in.strata.query_type = s->second.query_type;
      if (s->second.difficulty) in.strata.difficulty = s->second.difficulty;
    }
    in.token_count = raw.token_count ? *raw.token_count : WhitespaceWordCount(raw.text);

    const ParseOutcome parsed = ParseRollout(raw);
    if (const Rollout* r = std::get_if<Rollout>(&parsed)) {
      in.pred_bbox = r->answer.bbox;
      in.token_count = r->token_count;
      if (store != nullptr) {
        const EmbeddingRecord* roi = store->Find(raw.sample_id, Role::kRoi);
        const EmbeddingRecord* aoi = store->Find(raw.sample_id, Role::kAoi);
        const EmbeddingRecord* cap = store->Find(raw.sample_id, Role::kCaption);
        const EmbeddingRecord* think = store->Find(raw.sample_id, Role::kThink);
        if (roi && aoi && cap) {
          const DiscriminativeScores d = ComputeDiscriminativeScores(*cap, *roi, *aoi);
          if (d.s2 > 0.0) {
            in.s1 = d.s1;
            in.s2 = d.s2;
          }
        }
        if (roi && aoi && think) {
          const ThinkScores t = ComputeThinkScores(*think, *roi, *aoi);
          if (t.ts2 > 0.0) {
            in.ts1 = t.ts1;
            in.ts2 = t.ts2;
          }
        }
      }
    }
    out.push_back(std::move(in));
  }
  return out;
}

}  // namespace dpad
