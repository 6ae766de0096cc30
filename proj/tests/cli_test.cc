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

#include <algorithm>
#include <sstream>

#include "cli_runner.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace dpad {
namespace {

using testing::Scratch;
using testing::Slurp;

const std::string kFixtures = DPAD_FIXTURES_DIR;

std::vector<std::string> ScoreArgs(const Scratch& s, const std::string& out = "scores.jsonl") {
  return {"score", "--bundle", kFixtures + "/bundle.json", "--config",
          kFixtures + "/score_config.json", "--out", (s / out).string()};
}

TEST(CliScoreTest, MatchesGolden) {
  Scratch s("score");
  const auto r = s.Run(ScoreArgs(s));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Slurp(s / "scores.jsonl"), Slurp(kFixtures + "/score_golden.jsonl"));
  EXPECT_EQ(Slurp(s / "scores.summary.json"), Slurp(kFixtures + "/score_golden.summary.json"));
  const auto manifest = nlohmann::json::parse(Slurp(s / "scores.manifest.json"));
  EXPECT_EQ(manifest["command"], "score");
  EXPECT_FALSE(manifest["inputs"].empty());
  for (const auto& in : manifest["inputs"]) EXPECT_EQ(in["sha256"].get<std::string>().size(), 64u);
}

TEST(CliScoreTest, ExpectedRewards) {
  Scratch s("score_exp");
  ASSERT_EQ(s.Run(ScoreArgs(s)).exit_code, 0);
  const auto expected = nlohmann::json::parse(Slurp(kFixtures + "/expected_scores.json"));
  std::istringstream lines(Slurp(s / "scores.jsonl"));
  size_t seen = 0;
  for (std::string line; std::getline(lines, line);) {
    const auto j = nlohmann::json::parse(line);
    const std::string id = j["sample_id"];
    EXPECT_DOUBLE_EQ(j["r_final"].get<double>(), expected[id].get<double>()) << id;
    ++seen;
  }
  EXPECT_EQ(seen, expected.size());
}

TEST(CliScoreTest, RepeatRunsIdentical) {
  Scratch s("score_rep");
  ASSERT_EQ(s.Run(ScoreArgs(s, "a.jsonl")).exit_code, 0);
  ASSERT_EQ(s.Run(ScoreArgs(s, "b.jsonl")).exit_code, 0);
  EXPECT_EQ(Slurp(s / "a.jsonl"), Slurp(s / "b.jsonl"));
  EXPECT_EQ(Slurp(s / "a.summary.json"), Slurp(s / "b.summary.json"));
}

TEST(CliScoreTest, ValidationFailureWritesNothing) {
  Scratch s("score_bad");
  std::ofstream(s / "cfg.json") << R"({"lambda_format": 1, "bogus": 2})";
  auto args = ScoreArgs(s);
  args[4] = (s / "cfg.json").string();
  const auto r = s.Run(args);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(s.Files(), (std::vector<std::string>{"cfg.json"}));
}

TEST(CliScoreTest, RecordErrorsAndStrict) {
  Scratch s("score_strict");
  // Same bundle, but the store lacks every s08 embedding.
  std::ofstream emb(s / "emb.jsonl");
  std::istringstream all(Slurp(kFixtures + "/embeddings.jsonl"));
  for (std::string line; std::getline(all, line);) {
    if (line.find("\"s08\"") == std::string::npos) emb << line << "\n";
  }
  emb.close();
  ASSERT_EQ(s.Run({"pack-embeddings", "--in", (s / "emb.jsonl").string(), "--out",
                   (s / "emb.dpde").string()}).exit_code, 0);
  std::ofstream(s / "bundle.json") << nlohmann::json{
      {"rollouts", kFixtures + "/rollouts.jsonl"},
      {"ground_truth", kFixtures + "/gt.jsonl"},
      {"embeddings", (s / "emb.dpde").string()}}.dump();
  std::filesystem::remove(s / "emb.dpde.manifest.json");
  const std::vector<std::string> inputs = s.Files();

  auto args = ScoreArgs(s);
  args[2] = (s / "bundle.json").string();
  args.push_back("--strict");
  const auto strict = s.Run(args);
  EXPECT_EQ(strict.exit_code, 1) << strict.err;
  EXPECT_EQ(s.Files().size(), inputs.size());

  args.pop_back();
  const auto lenient = s.Run(args);
  ASSERT_EQ(lenient.exit_code, 0) << lenient.err;
  EXPECT_NE(lenient.err.find("s08"), std::string::npos);
  const auto summary = nlohmann::json::parse(Slurp(s / "scores.summary.json"));
  EXPECT_EQ(summary["n_errors"], 1);
  EXPECT_EQ(summary["n"], 7);
}

TEST(CliScoreTest, MissingInputIsIoError) {
  Scratch s("score_io");
  const auto r = s.Run({"score", "--bundle", (s / "nope.json").string(), "--config",
                        kFixtures + "/score_config.json", "--out", (s / "o.jsonl").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(s.Files().empty());
}

TEST(CliTrainToyTest, SeedDeterminism) {
  Scratch s("toy");
  const std::string cfg = kFixtures + "/toy.json";
  ASSERT_EQ(s.Run({"train-toy", "--config", cfg, "--seed", "7", "--out", (s / "a.csv").string()}).exit_code, 0);
  ASSERT_EQ(s.Run({"train-toy", "--config", cfg, "--seed", "7", "--out", (s / "b.csv").string()}).exit_code, 0);
  ASSERT_EQ(s.Run({"train-toy", "--config", cfg, "--seed", "8", "--out", (s / "c.csv").string()}).exit_code, 0);
  const std::string a = Slurp(s / "a.csv");
  EXPECT_EQ(a, Slurp(s / "b.csv"));
  EXPECT_NE(a, Slurp(s / "c.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), "step,mean_reward,accuracy,mean_delta");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 302);
}

TEST(CliTrainToyTest, UnknownVariantRejected) {
  Scratch s("toy_bad");
  const auto r = s.Run({"train-toy", "--config", kFixtures + "/toy.json", "--variant", "loud",
                        "--out", (s / "a.csv").string()});
  EXPECT_NE(r.exit_code, 0);
  EXPECT_TRUE(s.Files().empty());
}

TEST(CliEvalTest, BundleReportAndCompare) {
  Scratch s("eval");
  const auto r = s.Run({"eval", "--bundle", kFixtures + "/bundle.json", "--out",
                        (s / "a.json").string(), "--strata-axis", "query_type", "--emit-csv"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("giou"), std::string::npos);
  const auto report = nlohmann::json::parse(Slurp(s / "a.json"));
  EXPECT_EQ(report["n"], 8);
  EXPECT_TRUE(report["snr"].contains("ratio_of_means"));
  EXPECT_TRUE(report["strata"].contains("query_type"));
  EXPECT_TRUE(std::filesystem::exists(s / "a.samples.csv"));
  EXPECT_TRUE(std::filesystem::exists(s / "a.txt"));

  const auto c = s.Run({"compare", "--a", (s / "a.json").string(), "--b", (s / "a.json").string(),
                        "--out", (s / "cmp.json").string()});
  ASSERT_EQ(c.exit_code, 0) << c.err;
  const auto cmp = nlohmann::json::parse(Slurp(s / "cmp.json"));
  for (const auto& [metric, v] : cmp["overall"].items()) EXPECT_EQ(v["delta"], 0.0) << metric;
}

TEST(CliEvalTest, PairedPredictionDumps) {
  Scratch s("eval_pair");
  std::ofstream(s / "a.jsonl")
      << R"({"sample_id":"x","gt_bbox":[0,0,10,10],"pred_bbox":[0,0,10,10],"token_count":100})" "\n"
      << R"({"sample_id":"y","gt_bbox":[0,0,10,10],"pred_bbox":[0,0,5,10],"token_count":100})" "\n";
  std::ofstream(s / "b.jsonl")
      << R"({"sample_id":"x","gt_bbox":[0,0,10,10],"pred_bbox":[0,0,10,10],"token_count":50})" "\n"
      << R"({"sample_id":"y","gt_bbox":[0,0,10,10],"pred_bbox":[0,0,10,10],"token_count":50})" "\n";
  const auto r = s.Run({"eval", "--pred", (s / "a.jsonl").string(), "--pred-b",
                        (s / "b.jsonl").string(), "--out", (s / "ab.json").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto doc = nlohmann::json::parse(Slurp(s / "ab.json"));
  EXPECT_DOUBLE_EQ(doc["comparison"]["token_reduction_percent"].get<double>(), 50.0);
  EXPECT_DOUBLE_EQ(doc["a"]["giou"].get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(doc["comparison"]["overall"]["giou"]["delta"].get<double>(), -0.25);
}

TEST(CliEvalTest, NonPositiveDenominatorFails) {
  Scratch s("eval_bad");
  std::ofstream(s / "a.jsonl")
      << R"({"sample_id":"z9","gt_bbox":[0,0,10,10],"s1":0.3,"s2":-0.1})" "\n";
  const auto r = s.Run({"eval", "--pred", (s / "a.jsonl").string(), "--out", (s / "o.json").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("z9"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(s / "o.json"));
}

TEST(CliTest, UsageErrors) {
  Scratch s("usage");
  EXPECT_NE(s.Run({"frobnicate"}).exit_code, 0);
  EXPECT_NE(s.Run({"score"}).exit_code, 0);
  EXPECT_EQ(s.Run({"--help"}).exit_code, 0);
}

TEST(CliPackTest, RoundTripsFixtureStore) {
  Scratch s("pack");
  const auto r = s.Run({"pack-embeddings", "--in", kFixtures + "/embeddings.jsonl", "--out",
                        (s / "e.dpde").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Slurp(s / "e.dpde"), Slurp(kFixtures + "/embeddings.dpde"));
}

}  // namespace
}  // namespace dpad
