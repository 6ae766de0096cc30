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

#include "commands.h"

#include <chrono>
#include <filesystem>
#include <iostream>

#include "dpad/embedding_store.h"
#include "dpad/error.h"
#include "dpad/eval_harness.h"
#include "dpad/io.h"
#include "dpad/manifest.h"
#include "dpad/parallel.h"
#include "dpad/reward_composer.h"
#include "dpad/toy_env.h"
#include "json.hpp"

namespace dpad::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// r.jsonl -> r<suffix>, e.g. r.summary.json.
fs::path Sibling(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix);
}

json ReadJsonFile(const fs::path& path) {
  const std::string text = ReadFile(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

DpadVariant VariantFlag(const std::string& name) {
  const auto v = ParseVariant(name);
  if (!v) throw Error(ErrorCode::kInvalidConfig, "unknown variant " + name);
  return *v;
}

class Clock {
 public:
  Clock() : started_(UtcTimestamp()), t0_(std::chrono::steady_clock::now()) {}

  void Stamp(RunManifest& m) const {
    m.started_utc = started_;
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::string started_;
  std::chrono::steady_clock::time_point t0_;
};

void Warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

// Evaluation inputs from either a bundle or an eval dump.
std::vector<EvalInput> LoadEvalSide(const std::optional<std::string>& bundle,
                                    const std::optional<std::string>& pred, RunManifest& m,
                                    const char* side) {
  if (bundle.has_value() == pred.has_value()) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("side ") + side + " needs exactly one of a bundle or a prediction dump");
  }
  if (pred) {
    m.AddInput(*pred);
    return LoadEvalDump(*pred);
  }
  const DatasetBundle b = LoadBundle(*bundle, DpadVariant::kOff);
  m.AddInput(*bundle);
  for (const fs::path& p : b.paths.All()) m.AddInput(p);
  for (const std::string& w : b.coverage.warnings) Warn(w);
  return EvalInputsFromBundle(b);
}

std::vector<SampleEval> EvaluateAll(const std::vector<EvalInput>& inputs) {
  std::vector<SampleEval> out(inputs.size());
  ParallelFor(inputs.size(), ThreadBudget(), [&](size_t i) { out[i] = EvaluateSample(inputs[i]); });
  return out;
}

}  // namespace

int RunScore(const ScoreOptions& opt, const std::vector<std::string>& argv) {
  const Clock clock;
  RewardConfig cfg = RewardConfigFromJson(ReadJsonFile(opt.config));
  if (opt.variant) cfg.dpad_variant = VariantFlag(*opt.variant);
  cfg.Validate();

  const DatasetBundle bundle = LoadBundle(opt.bundle, cfg.dpad_variant);
  for (const std::string& w : bundle.coverage.warnings) Warn(w);
  const BatchResult result = ScoreBatch(bundle.rollouts, bundle.GroundTruth(),
                                        bundle.store ? &*bundle.store : nullptr, cfg, ThreadBudget());
  for (const RecordError& e : result.errors) {
    Warn("record " + std::to_string(e.index) + " (" + e.sample_id + "): " + e.message);
  }
  if (opt.strict && !result.errors.empty()) {
    throw Error(ErrorCode::kSchemaMismatch,
                std::to_string(result.errors.size()) + " records failed; nothing written");
  }

  std::string lines;
  for (const RewardBreakdown& b : result.breakdowns) lines += BreakdownToJson(b).dump() + "\n";

  RunManifest m;
  m.command = "score";
  m.argv = argv;
  m.config = RewardConfigToJson(cfg);
  if (opt.seed) m.config["seed"] = *opt.seed;
  m.AddInput(opt.config);
  m.AddInput(opt.bundle);
  for (const fs::path& p : bundle.paths.All()) m.AddInput(p);

  const fs::path out(opt.out);
  OutputTransaction tx;
  tx.Stage(out, std::move(lines));
  tx.Stage(Sibling(out, ".summary.json"), SummaryToJson(result).dump(2) + "\n");
  clock.Stamp(m);
  tx.Commit(m, Sibling(out, ".manifest.json"));
  std::cerr << "scored " << result.breakdowns.size() << " rollouts, " << result.errors.size()
            << " errors\n";
  return kExitOk;
}

int RunEval(const EvalOptions& opt, const std::vector<std::string>& argv) {
  const Clock clock;
  std::vector<StrataAxis> axes;
  for (const std::string& name : opt.strata_axes) {
    const auto axis = ParseAxis(name);
    if (!axis) throw Error(ErrorCode::kInvalidConfig, "unknown strata axis " + name);
    axes.push_back(*axis);
  }
  const bool paired = opt.bundle_b || opt.pred_b;

  RunManifest m;
  m.command = "eval";
  m.argv = argv;
  ojson axis_names = ojson::array();
  for (StrataAxis a : axes) axis_names.push_back(AxisName(a));
  m.config = {{"strata_axes", axis_names}, {"emit_csv", opt.emit_csv}, {"paired", paired}};

  const std::vector<SampleEval> samples_a = EvaluateAll(LoadEvalSide(opt.bundle, opt.pred, m, "a"));
  const EvalReport report_a = BuildReport(samples_a, axes);

  const fs::path out(opt.out);
  OutputTransaction tx;
  ojson doc;
  std::string table;
  if (paired) {
    const std::vector<SampleEval> samples_b =
        EvaluateAll(LoadEvalSide(opt.bundle_b, opt.pred_b, m, "b"));
    const EvalReport report_b = BuildReport(samples_b, axes);
    const Comparison cmp = Compare(report_a, report_b);
    doc["a"] = ReportToJson(report_a);
    doc["b"] = ReportToJson(report_b);
    doc["comparison"] = ComparisonToJson(cmp);
    table = RenderComparisonTable(cmp);
    if (opt.emit_csv) tx.Stage(Sibling(out, ".b.samples.csv"), SamplesToCsv(samples_b));
  } else {
    doc = ReportToJson(report_a);
    table = RenderReportTable(report_a);
  }
  if (!report_a.fallback_ids.empty()) {
    Warn(std::to_string(report_a.fallback_ids.size()) + " samples in side a scored without two masks");
  }
  if (opt.emit_csv) tx.Stage(Sibling(out, ".samples.csv"), SamplesToCsv(samples_a));
  tx.Stage(out, doc.dump(2) + "\n");
  tx.Stage(Sibling(out, ".txt"), table);
  clock.Stamp(m);
  tx.Commit(m, Sibling(out, ".manifest.json"));
  std::cout << table;
  return kExitOk;
}

int RunCompare(const CompareOptions& opt, const std::vector<std::string>& argv) {
  const Clock clock;
  const EvalReport a = ReportFromJson(ReadJsonFile(opt.a));
  const EvalReport b = ReportFromJson(ReadJsonFile(opt.b));
  const Comparison cmp = Compare(a, b);

  RunManifest m;
  m.command = "compare";
  m.argv = argv;
  m.AddInput(opt.a);
  m.AddInput(opt.b);
  const fs::path out(opt.out);
  const std::string table = RenderComparisonTable(cmp);
  OutputTransaction tx;
  tx.Stage(out, ComparisonToJson(cmp).dump(2) + "\n");
  tx.Stage(Sibling(out, ".txt"), table);
  clock.Stamp(m);
  tx.Commit(m, Sibling(out, ".manifest.json"));
  std::cout << table;
  return kExitOk;
}

int RunTrainToy(const TrainToyOptions& opt, const std::vector<std::string>& argv) {
  const Clock clock;
  TrainConfig cfg = TrainConfigFromJson(ReadJsonFile(opt.config));
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.variant) cfg.variant = VariantFlag(*opt.variant);
  const fs::path config_path(opt.config);
  const ToyEnvironment env = EnvironmentForConfig(cfg, config_path.parent_path());
  const TrainingTrace trace = Train(env, cfg);

  RunManifest m;
  m.command = "train-toy";
  m.argv = argv;
  m.config = TrainConfigToJson(cfg);
  m.AddInput(opt.config);
  if (!cfg.scenes_file.empty()) {
    fs::path scenes = cfg.scenes_file;
    if (scenes.is_relative()) scenes = config_path.parent_path() / scenes;
    m.AddInput(scenes);
  }
  const fs::path out(opt.out);
  OutputTransaction tx;
  tx.Stage(out, trace.ToCsv());
  clock.Stamp(m);
  tx.Commit(m, Sibling(out, ".manifest.json"));
  const TraceRow& last = trace.rows.back();
  std::cerr << "step " << last.step << ": mean_reward " << last.mean_reward << ", accuracy "
            << last.accuracy << ", optimal_mass " << last.optimal_mass << "\n";
  return kExitOk;
}

int RunPackEmbeddings(const PackEmbeddingsOptions& opt, const std::vector<std::string>& argv) {
  const Clock clock;
  const std::string text = ReadFile(opt.in);
  std::optional<EmbeddingStore> store;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = opt.in + ":" + std::to_string(line_no) + ": ";
    try {
      const json j = json::parse(line);
      const auto role = ParseRole(j.at("role").get<std::string>());
      if (!role) throw Error(ErrorCode::kParseError, where + "unknown role");
      EmbeddingRecord rec{j.at("sample_id").get<std::string>(), *role,
                          j.at("vector").get<std::vector<float>>()};
      if (!store) store.emplace(static_cast<uint32_t>(rec.vector.size()));
      store->Add(std::move(rec));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, where + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParseError) throw;
      throw Error(e.code(), where + e.what());
    }
  }
  if (!store) throw Error(ErrorCode::kEmptyInput, opt.in + ": no embedding records");

  RunManifest m;
  m.command = "pack-embeddings";
  m.argv = argv;
  m.config = {{"dim", store->dim()}, {"records", store->records().size()}};
  m.AddInput(opt.in);
  const fs::path out(opt.out);
  OutputTransaction tx;
  tx.Stage(out, store->Serialize());
  clock.Stamp(m);
  tx.Commit(m, Sibling(out, ".manifest.json"));
  return kExitOk;
}

int RunMakeScenes(const MakeScenesOptions& opt, const std::vector<std::string>& argv) {
  const Clock clock;
  TrainConfig cfg;
  if (opt.config) cfg = TrainConfigFromJson(ReadJsonFile(*opt.config));
  if (opt.seed) cfg.seed = *opt.seed;
  AmbiguousSuiteConfig suite = cfg.suite;
  suite.seed = cfg.suite_seed.value_or(cfg.seed);
  suite.noise_sigma = cfg.noise_sigma;
  const ToyEnvironment env = MakeAmbiguousSuite(suite);

  RunManifest m;
  m.command = "make-scenes";
  m.argv = argv;
  m.config = TrainConfigToJson(cfg)["suite"];
  if (opt.config) m.AddInput(*opt.config);
  const fs::path out(opt.out);
  OutputTransaction tx;
  tx.Stage(out, EnvironmentToJson(env).dump(2) + "\n");
  clock.Stamp(m);
  tx.Commit(m, Sibling(out, ".manifest.json"));
  return kExitOk;
}

}  // namespace dpad::cli
