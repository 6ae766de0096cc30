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

// File formats: JSONL dumps, ground truth, strata labels and dataset bundles.
//
// Loaders report the file and 1-based line of the first bad record. Writers
// go through AtomicWrite so a failed run never leaves a partial file.

#ifndef DPAD_IO_H_
#define DPAD_IO_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpad/embedding_store.h"
#include "dpad/eval_harness.h"
#include "dpad/geometry.h"
#include "dpad/reward_composer.h"
#include "dpad/rollout.h"
#include "dpad/semantics.h"
#include "json.hpp"

namespace dpad {

// Throws kIoError.
std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`. Throws kIoError.
void AtomicWrite(const std::filesystem::path& path, std::string_view contents);

// {"h": int, "w": int, "counts": [int]}; throws kMalformedRle.
MaskRLE MaskFromJson(const nlohmann::json& j);
nlohmann::ordered_json MaskToJson(const MaskRLE& mask);

struct GroundTruthRecord {
  std::string sample_id;
  Localization loc;
  std::optional<MaskRLE> gt_mask;
  std::optional<MaskRLE> pred_mask;
  Strata strata;
};

// `source` names the input in error messages. All parsers throw kParseError
// (or the more specific geometry code) with "source:line: ..." text, and
// reject duplicate sample ids.
std::vector<RawRollout> ParseRolloutDump(std::string_view text, std::string_view source);
std::vector<GroundTruthRecord> ParseGroundTruth(std::string_view text, std::string_view source);
// {"sample_id": str, "query_type": str?, "difficulty": str?}
std::map<std::string, Strata> ParseStrata(std::string_view text, std::string_view source);
// Ground-truth fields plus optional "pred_bbox", "s1", "s2", "ts1", "ts2"
// and "token_count". Needs "gt_mask" or "gt_bbox".
std::vector<EvalInput> ParseEvalDump(std::string_view text, std::string_view source);

std::vector<RawRollout> LoadRolloutDump(const std::filesystem::path& path);
std::vector<GroundTruthRecord> LoadGroundTruth(const std::filesystem::path& path);
std::map<std::string, Strata> LoadStrata(const std::filesystem::path& path);
std::vector<EvalInput> LoadEvalDump(const std::filesystem::path& path);

nlohmann::ordered_json EvalInputToJson(const EvalInput& in);

// Bundle document: {"rollouts": path, "ground_truth": path,
// "embeddings": path?, "strata": path?}; relative paths resolve against the
// bundle file's directory.
struct BundlePaths {
  std::filesystem::path rollouts;
  std::filesystem::path ground_truth;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> strata;

  std::vector<std::filesystem::path> All() const;
};

BundlePaths ReadBundlePaths(const std::filesystem::path& bundle_file);

struct CoverageReport {
  std::map<Role, std::vector<std::string>> missing_roles;  // role -> sample ids
  std::vector<std::string> warnings;
};

struct DatasetBundle {
  BundlePaths paths;
  std::vector<RawRollout> rollouts;
  std::vector<GroundTruthRecord> ground_truth;
  std::optional<EmbeddingStore> store;
  std::map<std::string, Strata> strata;
  CoverageReport coverage;

  GroundTruthIndex GroundTruth() const;
};

// Cross-references every rollout against the ground truth (kCrossRefError
// naming the missing ids) and records which embedding roles the variant
// needs but the store lacks. A variant other than kOff without an
// embedding store is kInvalidConfig.
DatasetBundle LoadBundle(const std::filesystem::path& bundle_file, DpadVariant variant);

// One evaluation input per rollout, in dump order. Predicted boxes come from
// parsed answers; similarities come from the store when present. Labels in
// the strata file win over labels in the ground truth.
std::vector<EvalInput> EvalInputsFromBundle(const DatasetBundle& bundle);

}  // namespace dpad

#endif  // DPAD_IO_H_
