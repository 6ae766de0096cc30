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

// Acceptance suite. Prints one PASS/FAIL line per criterion with its runtime
// and exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cli_runner.h"
#include "dpad/eval_harness.h"
#include "dpad/geometry.h"
#include "dpad/grpo.h"
#include "dpad/rollout.h"
#include "dpad/semantics.h"
#include "dpad/toy_env.h"
#include "format_corpus.h"
#include "json.hpp"
#include "oracles.h"

namespace dpad {
namespace {

using testing::Scratch;
using testing::Slurp;

// Collects the first few failure notes of one criterion.
class Check {
 public:
  void Expect(bool ok, const std::string& note) {
    if (ok) return;
    ++failures_;
    if (notes_.size() < 3) notes_.push_back(note);
  }
  void Info(const std::string& s) { info_ += (info_.empty() ? "" : "; ") + s; }

  bool ok() const { return failures_ == 0; }
  std::string Detail() const {
    std::string d = info_;
    if (failures_ > 0) {
      d += (d.empty() ? "" : "; ") + std::to_string(failures_) + " failure(s)";
      for (const std::string& n : notes_) d += " | " + n;
    }
    return d;
  }

 private:
  size_t failures_ = 0;
  std::vector<std::string> notes_;
  std::string info_;
};

std::string Fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

void RewardAlgebra(Check& c) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double s1 = u(rng), s2 = (i % 10 == 0) ? s1 : u(rng);
    const DiscriminativeScores d = ScoresFromSimilarities(s1, s2);
    const double delta = std::max(0.0, s1 - s2);
    c.Expect(d.delta == delta && d.r_dpad == (delta > 0.0 ? 1.0 : 0.0),
             "pair " + Fmt(s1) + "," + Fmt(s2));
  }
  const DiscriminativeScores t = ScoresFromSimilarities(0.2554, 0.2277);
  c.Expect(t.r_dpad == 1.0, "mean similarities 25.54/22.77 should give r_dpad 1");
  c.Info("10000 pairs exact; 25.54 vs 22.77 -> r_dpad " + Fmt(t.r_dpad));
}

void GeometryOracle(Check& c) {
  std::mt19937_64 rng(202);
  auto coord = [&] { return static_cast<int>(rng() % 257); };
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    int b[2][4];
    for (auto& box : b) {
      int x1 = coord(), x2 = coord(), y1 = coord(), y2 = coord();
      while (x1 == x2) x2 = coord();
      while (y1 == y2) y2 = coord();
      box[0] = std::min(x1, x2), box[2] = std::max(x1, x2);
      box[1] = std::min(y1, y2), box[3] = std::max(y1, y2);
    }
    const BBox p{double(b[0][0]), double(b[0][1]), double(b[0][2]), double(b[0][3])};
    const BBox g{double(b[1][0]), double(b[1][1]), double(b[1][2]), double(b[1][3])};
    const double pixel = oracle::Iou(oracle::PaintBox(256, 256, b[0][0], b[0][1], b[0][2], b[0][3]),
                                     oracle::PaintBox(256, 256, b[1][0], b[1][1], b[1][2], b[1][3]));
    const double err = std::abs(BoxIou(p, g) - pixel);
    worst = std::max(worst, err);
    c.Expect(err <= 1e-9, "box pair " + std::to_string(i));
  }
  for (int i = 0; i < 200; ++i) {
    const int h = 1 + rng() % 64, w = 1 + rng() % 64;
    oracle::Grid a(h, w), b(h, w);
    const int density = rng() % 100;
    for (char& px : a.px) px = static_cast<int>(rng() % 100) < density;
    for (char& px : b.px) px = static_cast<int>(rng() % 100) < density;
    const MaskRLE ra{uint32_t(h), uint32_t(w), oracle::EncodeRuns(a)};
    const MaskRLE rb{uint32_t(h), uint32_t(w), oracle::EncodeRuns(b)};
    c.Expect(MaskIou(ra, rb) == oracle::Iou(a, b), "mask pair " + std::to_string(i));
  }
  c.Info("1000 box pairs, max err " + Fmt(worst, 3) + "; 200 masks exact");
}

void MetricOracle(Check& c) {
  std::mt19937_64 rng(303);
  std::vector<SampleEval> samples;
  long double iou_sum = 0;
  long inter = 0, uni = 0;
  for (int i = 0; i < 50; ++i) {
    const int h = 4 + rng() % 60, w = 4 + rng() % 60;
    oracle::Grid a(h, w), b(h, w);
    for (char& px : a.px) px = rng() % 3 == 0;
    for (char& px : b.px) px = rng() % 3 == 0;
    EvalInput in;
    in.sample_id = "m" + std::to_string(i);
    in.pred_mask = MaskRLE{uint32_t(h), uint32_t(w), oracle::EncodeRuns(a)};
    in.gt_mask = MaskRLE{uint32_t(h), uint32_t(w), oracle::EncodeRuns(b)};
    samples.push_back(EvaluateSample(in));
    const auto [ci, cu] = oracle::Counts(a, b);
    iou_sum += oracle::Iou(a, b);
    inter += ci;
    uni += cu;
  }
  const EvalReport r = BuildReport(samples);
  c.Expect(std::abs(r.giou - double(iou_sum / 50)) <= 1e-12, "gIoU vs bitmap oracle");
  c.Expect(std::abs(r.ciou - double(inter) / uni) <= 1e-12, "cIoU vs bitmap oracle");

  auto input = [](std::string id, oracle::Grid p, oracle::Grid g) {
    EvalInput in;
    in.sample_id = std::move(id);
    in.pred_mask = MaskRLE{uint32_t(p.h), uint32_t(p.w), oracle::EncodeRuns(p)};
    in.gt_mask = MaskRLE{uint32_t(g.h), uint32_t(g.w), oracle::EncodeRuns(g)};
    return EvaluateSample(in);
  };
  const std::vector<SampleEval> fixture = {
      input("a", oracle::PaintBox(20, 20, 0, 0, 10, 10), oracle::PaintBox(20, 20, 5, 5, 15, 15)),
      input("b", oracle::PaintBox(20, 20, 2, 2, 12, 12), oracle::PaintBox(20, 20, 2, 2, 12, 12))};
  c.Expect(fixture[0].intersection == 25 && fixture[0].union_ == 175 &&
               fixture[1].intersection == 100 && fixture[1].union_ == 100,
           "fixture counts");
  const EvalReport f = BuildReport(fixture);
  c.Expect(std::abs(f.ciou - 125.0 / 275.0) <= 1e-12, "fixture cIoU " + Fmt(f.ciou, 10));
  c.Expect(std::abs(f.giou - 4.0 / 7.0) <= 1e-12, "fixture gIoU " + Fmt(f.giou, 10));
  c.Expect(f.ciou != f.giou, "metrics should diverge");
  c.Info("50 pairs; fixture cIoU " + Fmt(f.ciou, 7) + " gIoU " + Fmt(f.giou, 7));
}

// The stated fixture has equal denominators, where both aggregations agree
// (1.375). 1.2941 is the ratio of means once the second denominator is
// 0.225; both fixtures are checked against hand arithmetic.
void SnrAggregation(Check& c) {
  auto report = [](std::vector<std::pair<double, double>> sims) {
    std::vector<SampleEval> s;
    for (size_t i = 0; i < sims.size(); ++i) {
      EvalInput in;
      in.sample_id = "s" + std::to_string(i);
      in.gt_bbox = BBox{0, 0, 4, 4};
      in.pred_bbox = BBox{0, 0, 4, 4};
      in.s1 = sims[i].first;
      in.s2 = sims[i].second;
      s.push_back(EvaluateSample(in));
    }
    return BuildReport(s);
  };
  const EvalReport stated = report({{0.25, 0.20}, {0.30, 0.20}});
  c.Expect(stated.snr && std::abs(stated.snr->mean_snr - 1.375) <= 1e-12,
           "per-sample mean on stated fixture");
  c.Expect(stated.snr && std::abs(stated.snr->ratio_of_means - 0.275 / 0.20) <= 1e-12,
           "ratio of means on stated fixture");

  const EvalReport split = report({{0.25, 0.20}, {0.30, 0.225}});
  const double per_sample = (0.25 / 0.20 + 0.30 / 0.225) / 2;
  c.Expect(split.snr && std::abs(split.snr->ratio_of_means - 0.275 / 0.2125) <= 1e-12 &&
               std::abs(split.snr->ratio_of_means - 1.2941) < 5e-5,
           "ratio of means 1.2941");
  c.Expect(split.snr && std::abs(split.snr->mean_snr - per_sample) <= 1e-12 &&
               split.snr->mean_snr != split.snr->ratio_of_means,
           "per-sample mean differs from ratio of means");

  const nlohmann::ordered_json j = ReportToJson(split);
  c.Expect(j["snr"].contains("mean_snr") && j["snr"].contains("ratio_of_means"),
           "report emits both modes");
  c.Info("s2 equal: " + Fmt(stated.snr->mean_snr, 5) + " vs " + Fmt(stated.snr->ratio_of_means, 5) +
         "; s2 0.20/0.225: " + Fmt(split.snr->mean_snr, 5) + " vs " +
         Fmt(split.snr->ratio_of_means, 5));
}

void TokenStatistics(Check& c) {
  std::vector<uint64_t> a(90, 118), b(52, 69);
  a.insert(a.end(), 10, 117);
  b.insert(b.end(), 48, 68);
  auto report = [](const std::vector<uint64_t>& counts) {
    std::vector<SampleEval> s;
    for (size_t i = 0; i < counts.size(); ++i) {
      EvalInput in;
      in.sample_id = "t" + std::to_string(i);
      in.gt_bbox = BBox{0, 0, 4, 4};
      in.token_count = counts[i];
      s.push_back(EvaluateSample(in));
    }
    return BuildReport(s);
  };
  const EvalReport ra = report(a), rb = report(b);
  c.Expect(std::abs(ra.tokens->mean - 117.90) <= 1e-9 && std::abs(rb.tokens->mean - 68.52) <= 1e-9,
           "fixture means");
  const Comparison cmp = Compare(ra, rb);
  const double pct = cmp.token_reduction_percent.value_or(-1);
  const double expected = (117.90 - 68.52) / 117.90 * 100.0;
  c.Expect(std::abs(pct - expected) <= 1e-6, "reduction " + Fmt(pct, 10));
  c.Expect(std::abs(pct - 41.88) < 0.005, "reduction should round to 41.88");
  c.Info("117.90 -> 68.52 gives " + Fmt(pct, 8) + "%");
}

void GrpoAdvantages(Check& c) {
  const std::vector<double> r = {1, 1, 0, 0};
  c.Expect(GroupAdvantages(r) == std::vector<double>{1, 1, -1, -1}, "[1,1,0,0]");
  std::mt19937_64 rng(404);
  std::normal_distribution<double> n(0, 1);
  for (int g = 0; g < 100; ++g) {
    const std::vector<double> same(2 + rng() % 10, n(rng));
    for (double a : GroupAdvantages(same)) c.Expect(a == 0.0, "constant group");
  }
  for (int g = 0; g < 1000; ++g) {
    std::vector<double> rewards(2 + rng() % 15);
    for (double& x : rewards) x = n(rng) * 3;
    double sum = 0;
    for (double a : GroupAdvantages(rewards)) sum += a;
    c.Expect(std::abs(sum / rewards.size()) <= 1e-9, "mean-zero group " + std::to_string(g));
  }

  int checked = 0, draws = 0;
  double worst = 0;
  while (checked < 100) {
    ++draws;
    const size_t actions = 2 + rng() % 6, members = 2 + rng() % 7;
    ToyPolicy policy(1, actions, 0.1, 0.05 + 0.35 * (rng() % 1000) / 1000.0);
    ToyPolicy old = policy;
    for (size_t k = 0; k < actions; ++k) {
      policy.Logits(0)[k] = n(rng);
      old.Logits(0)[k] = policy.Logits(0)[k] + 0.3 * n(rng);
    }
    const std::vector<double> p_old = old.Probabilities(0), p = policy.Probabilities(0);
    RolloutGroup group;
    std::vector<double> rewards;
    bool kink = false;
    for (size_t i = 0; i < members; ++i) {
      const size_t a = rng() % actions;
      group.members.push_back({a, p_old[a], n(rng), 0.0});
      rewards.push_back(group.members.back().reward);
      const double ratio = p[a] / p_old[a], e = policy.clip_epsilon();
      kink |= std::abs(ratio - (1 + e)) < 1e-3 || std::abs(ratio - (1 - e)) < 1e-3;
    }
    // The clipped objective is not differentiable at the clip edges.
    if (kink) continue;
    const std::vector<double> adv = GroupAdvantages(rewards);
    const std::vector<double> grad = SurrogateGradient(policy, group, adv);
    const double h = 1e-6;
    for (size_t k = 0; k < actions; ++k) {
      ToyPolicy up = policy, down = policy;
      up.Logits(0)[k] += h;
      down.Logits(0)[k] -= h;
      const double fd =
          (SurrogateObjective(up, group, adv) - SurrogateObjective(down, group, adv)) / (2 * h);
      const double rel = std::abs(grad[k] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
      c.Expect(rel <= 1e-4, "gradient policy " + std::to_string(checked));
    }
    ++checked;
  }
  c.Info("1000 groups mean-zero; 100 policies (" + std::to_string(draws - 100) +
         " kink draws skipped), worst gradient rel err " + Fmt(worst, 3));
}

void ToyConvergence(Check& c) {
  constexpr int kSeeds = 10;
  double mass = 0, acc[3] = {0, 0, 0};
  int ordered = 0;
  const DpadVariant variants[3] = {DpadVariant::kBinary, DpadVariant::kScaled, DpadVariant::kOff};
  for (int seed = 1; seed <= kSeeds; ++seed) {
    double final_acc[3];
    for (int v = 0; v < 3; ++v) {
      TrainConfig cfg;
      cfg.seed = seed;
      cfg.steps = 2000;
      cfg.group_size = 8;
      cfg.variant = variants[v];
      const ToyEnvironment env = EnvironmentForConfig(cfg);
      c.Expect(env.scenes.size() == 20 && env.objects_per_scene() == 5, "suite shape");
      const TrainingTrace t = Train(env, cfg);
      final_acc[v] = t.rows.back().accuracy;
      acc[v] += final_acc[v];
      if (v == 0) mass += t.rows.back().optimal_mass;
    }
    const bool ok = final_acc[0] >= final_acc[1] && final_acc[1] >= final_acc[2];
    ordered += ok;
    c.Expect(ok, "ordering at seed " + std::to_string(seed));
  }
  mass /= kSeeds;
  c.Expect(mass >= 0.9, "optimal mass " + Fmt(mass));
  c.Info("binary optimal mass " + Fmt(mass, 4) + "; mean accuracy binary/scaled/off " +
         Fmt(acc[0] / kSeeds, 4) + "/" + Fmt(acc[1] / kSeeds, 4) + "/" + Fmt(acc[2] / kSeeds, 4) +
         "; ordering held on " + std::to_string(ordered) + "/10 seeds");
}

void FormatCorpus(Check& c) {
  const std::vector<corpus::Case> cases = corpus::GoldenCases();
  c.Expect(cases.size() == 20, "corpus size");
  for (const corpus::Case& k : cases) {
    c.Expect(FormatReward(CheckFormat(k.text)) == k.expected, k.name);
  }
  std::mt19937_64 rng(505);
  const std::string pieces[] = {"<think>", "</think>", "<answer>", "</answer>", "<caption>",
                                "</caption>", "{", "}", "[", "]", "\"bbox\"", ":", ",", "1"};
  size_t parsed = 0;
  for (int i = 0; i < 100000; ++i) {
    std::string s;
    if (i % 2 == 0) {
      const int len = rng() % 96;
      for (int k = 0; k < len; ++k) {
        if (rng() % 4 == 0) s += pieces[rng() % std::size(pieces)];
        else s += static_cast<char>(rng() & 0xFF);
      }
    } else {
      // A few byte edits on a golden string.
      s = cases[rng() % cases.size()].text;
      for (int k = 0, edits = rng() % 4; k < edits && !s.empty(); ++k) {
        const size_t at = rng() % s.size();
        switch (rng() % 3) {
          case 0: s[at] = static_cast<char>(rng() & 0xFF); break;
          case 1: s.erase(at, 1 + rng() % 8); break;
          default: s.insert(at, pieces[rng() % std::size(pieces)]);
        }
      }
    }
    parsed += std::holds_alternative<Rollout>(ParseRollout({"fuzz", s, std::nullopt}));
    const double f = FormatReward(CheckFormat(s));
    c.Expect(f >= 0 && f <= 3, "fuzz format range");
  }
  c.Info("20 golden cases; 100000 fuzz inputs, " + std::to_string(parsed) + " parsed");
}

// Manifests carry wall-clock fields and output names; the rest must match.
nlohmann::json StableManifest(const std::filesystem::path& p) {
  nlohmann::json j = nlohmann::json::parse(Slurp(p));
  j.erase("started_utc");
  j.erase("wall_seconds");
  j.erase("outputs");  // output paths differ by name between the two runs
  j.erase("argv");
  return j;
}

void EndToEndDeterminism(Check& c) {
  Scratch s("acceptance");
  const std::string fx = DPAD_FIXTURES_DIR;
  for (const char* run : {"1", "2"}) {
    const std::string tag = run;
    const auto score = s.Run({"score", "--bundle", fx + "/bundle.json", "--config",
                              fx + "/score_config.json", "--out", (s / ("s" + tag + ".jsonl")).string()});
    c.Expect(score.exit_code == 0, "score run " + tag + ": " + score.err);
    const auto toy = s.Run({"train-toy", "--config", fx + "/toy.json", "--seed", "7", "--out",
                            (s / ("t" + tag + ".csv")).string()});
    c.Expect(toy.exit_code == 0, "train-toy run " + tag + ": " + toy.err);
  }
  c.Expect(Slurp(s / "s1.jsonl") == Slurp(s / "s2.jsonl"), "score breakdowns differ");
  c.Expect(Slurp(s / "s1.summary.json") == Slurp(s / "s2.summary.json"), "score summaries differ");
  c.Expect(!Slurp(s / "t1.csv").empty() && Slurp(s / "t1.csv") == Slurp(s / "t2.csv"),
           "train-toy traces differ");
  c.Expect(StableManifest(s / "s1.manifest.json") == StableManifest(s / "s2.manifest.json"),
           "score manifests differ beyond timing fields");
  c.Expect(StableManifest(s / "t1.manifest.json") == StableManifest(s / "t2.manifest.json"),
           "train-toy manifests differ beyond timing fields");
  c.Info("score and train-toy --seed 7 byte-identical over two runs");
}

struct Criterion {
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  std::function<void(Check&)> run;
};

}  // namespace
}  // namespace dpad

int main() {
  using dpad::Check;
  const std::vector<dpad::Criterion> criteria = {
      {"reward_algebra", 1.0, dpad::RewardAlgebra},
      {"geometry_oracle", 10.0, dpad::GeometryOracle},
      {"metric_oracle", 0.0, dpad::MetricOracle},
      {"snr_aggregation", 0.0, dpad::SnrAggregation},
      {"token_statistics", 0.0, dpad::TokenStatistics},
      {"grpo_advantages", 0.0, dpad::GrpoAdvantages},
      {"toy_convergence_and_ordering", 120.0, dpad::ToyConvergence},
      {"format_reward_corpus", 0.0, dpad::FormatCorpus},
      {"end_to_end_determinism", 0.0, dpad::EndToEndDeterminism},
  };
  int failed = 0;
  for (const dpad::Criterion& cr : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.Expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.budget_seconds > 0) {
      check.Expect(secs < cr.budget_seconds,
                   "runtime over " + dpad::Fmt(cr.budget_seconds) + "s budget");
    }
    failed += !check.ok();
    std::printf("%s  %-30s %8.3fs  %s\n", check.ok() ? "PASS" : "FAIL", cr.name, secs,
                check.Detail().c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
