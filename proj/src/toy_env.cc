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

#include "dpad/toy_env.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "dpad/error.h"

namespace dpad {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kFrameWidth = 640.0;
constexpr double kFrameHeight = 480.0;
constexpr size_t kGridCols = 3;
constexpr size_t kGridRows = 2;
constexpr double kCellMargin = 20.0;
constexpr double kMaxTwinShift = 4.0;

uint64_t Mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<double> GaussianVector(RngStream& rng, uint32_t dim, double sigma) {
  std::vector<double> v(dim);
  for (double& x : v) x = sigma * rng.NextNormal();
  return v;
}

double Norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Removes the components along each (unit) basis vector.
void ProjectOut(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (const auto& b : basis) {
    double d = 0.0;
    for (size_t i = 0; i < v.size(); ++i) d += v[i] * b[i];
    for (size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
  }
}

void Normalize(std::vector<double>& v) {
  const double n = Norm(v);
  for (double& x : v) x /= n;
}

std::vector<double> Add(std::vector<double> a, const std::vector<double>& b, double scale = 1.0) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
  return a;
}

std::vector<std::vector<double>> OrthonormalSet(RngStream& rng, uint32_t dim, size_t count) {
  std::vector<std::vector<double>> basis;
  while (basis.size() < count) {
    std::vector<double> v = GaussianVector(rng, dim, 1.0);
    ProjectOut(v, basis);
    // Re-orthogonalize once for numerical hygiene.
    ProjectOut(v, basis);
    if (Norm(v) < 1e-6) continue;
    Normalize(v);
    basis.push_back(std::move(v));
  }
  return basis;
}

Localization RandomBoxInCell(RngStream& rng, size_t cell) {
  const double cell_w = kFrameWidth / kGridCols;
  const double cell_h = kFrameHeight / kGridRows;
  const double cx = static_cast<double>(cell % kGridCols) * cell_w;
  const double cy = static_cast<double>(cell / kGridCols) * cell_h;
  const double w = std::round(80.0 + 60.0 * rng.NextUniform());
  const double h = std::round(80.0 + 60.0 * rng.NextUniform());
  const double x1 = std::round(cx + kCellMargin + (cell_w - 2 * kCellMargin - w) * rng.NextUniform());
  const double y1 = std::round(cy + kCellMargin + (cell_h - 2 * kCellMargin - h) * rng.NextUniform());
  Localization loc;
  loc.bbox = {x1, y1, x1 + w, y1 + h};
  loc.p1 = {x1 + std::round(0.3 * w), y1 + std::round(0.3 * h)};
  loc.p2 = {x1 + std::round(0.7 * w), y1 + std::round(0.7 * h)};
  return loc;
}

std::vector<double> ReadVector(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidConfig, std::string(what) + " must be an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw Error(ErrorCode::kInvalidConfig, std::string(what) + " must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

std::vector<double> ReadFixed(const json& j, size_t n, const char* what) {
  std::vector<double> v = ReadVector(j, what);
  if (v.size() != n) {
    throw Error(ErrorCode::kInvalidConfig, std::string(what) + " must have " + std::to_string(n) + " entries");
  }
  return v;
}

DiscriminativeScores ToyScores(const ToyEnvironment& env, const ToyScene& scene, size_t action,
                               RngStream* noise) {
  std::vector<double> caption = env.caption_vocabulary[env.CaptionOf(action)];
  if (noise != nullptr && env.noise_sigma > 0.0) {
    for (double& x : caption) x += env.noise_sigma * noise->NextNormal();
  }
  return ScoresFromSimilarities(Cosine(caption, scene.target_feature()),
                                Cosine(caption, scene.aoi_feature));
}

// Clean per-action quantities, cached once per training run.
struct CleanTable {
  size_t actions = 0;
  std::vector<double> reward;         // [scene * actions + a]
  std::vector<double> delta;
  std::vector<uint8_t> discriminative;
  std::vector<uint8_t> optimal;
};

CleanTable BuildCleanTable(const ToyEnvironment& env, const RewardConfig& cfg) {
  CleanTable t;
  t.actions = env.action_count();
  const size_t n = env.scenes.size() * t.actions;
  t.reward.resize(n);
  t.delta.resize(n);
  t.discriminative.resize(n);
  t.optimal.resize(n);
  for (size_t s = 0; s < env.scenes.size(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < t.actions; ++a) {
      const size_t i = s * t.actions + a;
      const RewardBreakdown b = ScoreToyAction(env, s, a, cfg, nullptr);
      const DiscriminativeScores sc = ToyScores(env, env.scenes[s], a, nullptr);
      t.reward[i] = b.r_final;
      t.delta[i] = sc.delta;
      t.discriminative[i] = IsDiscriminativeAction(env, s, a) ? 1 : 0;
      best = std::max(best, b.r_final);
    }
    for (size_t a = 0; a < t.actions; ++a) {
      t.optimal[s * t.actions + a] = t.reward[s * t.actions + a] == best ? 1 : 0;
    }
  }
  return t;
}

TraceRow Evaluate(const CleanTable& t, const ToyPolicy& policy, uint64_t step) {
  TraceRow row;
  row.step = step;
  const size_t scenes = policy.rows();
  for (size_t s = 0; s < scenes; ++s) {
    const std::vector<double> p = policy.Probabilities(s);
    for (size_t a = 0; a < t.actions; ++a) {
      const size_t i = s * t.actions + a;
      row.mean_reward += p[a] * t.reward[i];
      row.mean_delta += p[a] * t.delta[i];
      if (t.optimal[i]) row.optimal_mass += p[a];
    }
    row.accuracy += t.discriminative[s * t.actions + policy.Greedy(s)];
  }
  const double n = static_cast<double>(scenes);
  row.mean_reward /= n;
  row.mean_delta /= n;
  row.optimal_mass /= n;
  row.accuracy /= n;
  return row;
}

void AppendShortest(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

uint64_t GetUnsigned(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<int64_t>() < 0) {
    throw Error(ErrorCode::kInvalidConfig, std::string(key) + " must be a nonnegative integer");
  }
  return j[key].get<uint64_t>();
}

double GetDouble(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw Error(ErrorCode::kInvalidConfig, std::string(key) + " must be a number");
  return j[key].get<double>();
}

ToyEnvironment EnvironmentFromJsonUnchecked(const json& j) {
  ToyEnvironment env;
  env.dim = static_cast<uint32_t>(GetUnsigned(j, "dim"));
  if (j.contains("noise_sigma")) env.noise_sigma = GetDouble(j, "noise_sigma");
  if (j.contains("rng_seed")) env.rng_seed = GetUnsigned(j, "rng_seed");
  for (const auto& c : j.at("caption_vocabulary")) env.caption_vocabulary.push_back(ReadVector(c, "caption"));
  for (const auto& js : j.at("scenes")) {
    ToyScene scene;
    scene.id = js.at("id").get<std::string>();
    scene.gt_index = GetUnsigned(js, "gt_index");
    scene.background = ReadVector(js.at("background"), "background");
    for (const auto& jo : js.at("objects")) {
      ToyObject obj;
      const auto b = ReadFixed(jo.at("bbox"), 4, "bbox");
      const auto p1 = ReadFixed(jo.at("points_1"), 2, "points_1");
      const auto p2 = ReadFixed(jo.at("points_2"), 2, "points_2");
      obj.loc = {{b[0], b[1], b[2], b[3]}, {p1[0], p1[1]}, {p2[0], p2[1]}};
      obj.feature = ReadVector(jo.at("feature"), "feature");
      scene.objects.push_back(std::move(obj));
    }
    env.scenes.push_back(std::move(scene));
  }
  env.Finalize();
  return env;
}

}  // namespace

uint64_t RngStream::Key(uint64_t seed, std::string_view state_id, uint64_t step, uint64_t member) {
  uint64_t h = Mix64(seed);
  h = Mix64(h ^ Fnv1a(state_id));
  h = Mix64(h ^ step);
  return Mix64(h ^ member);
}

uint64_t RngStream::NextU64() { return Mix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++); }

double RngStream::NextUniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

double RngStream::NextNormal() {
  const double u1 = 1.0 - NextUniform();  // (0, 1]
  const double u2 = NextUniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void ToyEnvironment::Finalize() {
  if (dim == 0) throw Error(ErrorCode::kInvalidConfig, "environment dim must be positive");
  if (scenes.empty()) throw Error(ErrorCode::kInvalidConfig, "environment has no scenes");
  if (caption_vocabulary.empty()) throw Error(ErrorCode::kInvalidConfig, "empty caption vocabulary");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCode::kInvalidConfig, "noise_sigma must be >= 0");
  }
  for (const auto& c : caption_vocabulary) {
    if (c.size() != dim || Norm(c) == 0.0) {
      throw Error(ErrorCode::kInvalidConfig, "caption vectors must have dim entries and nonzero norm");
    }
  }
  const size_t n_obj = scenes[0].objects.size();
  std::set<std::string> ids;
  for (ToyScene& scene : scenes) {
    if (!ids.insert(scene.id).second) throw Error(ErrorCode::kInvalidConfig, "duplicate scene id " + scene.id);
    if (scene.objects.empty() || scene.objects.size() != n_obj) {
      throw Error(ErrorCode::kInvalidConfig, "every scene needs the same nonzero object count");
    }
    if (scene.gt_index >= scene.objects.size()) {
      throw Error(ErrorCode::kInvalidConfig, scene.id + ": gt_index out of range");
    }
    if (scene.background.size() != dim) {
      throw Error(ErrorCode::kInvalidConfig, scene.id + ": background has wrong dimension");
    }
    scene.aoi_feature = scene.background;
    const double inv = 1.0 / static_cast<double>(scene.objects.size());
    for (const ToyObject& obj : scene.objects) {
      if (obj.feature.size() != dim || Norm(obj.feature) == 0.0) {
        throw Error(ErrorCode::kInvalidConfig, scene.id + ": object feature must have dim entries and nonzero norm");
      }
      if (!obj.loc.bbox.IsValid() || !obj.loc.p1.IsValid() || !obj.loc.p2.IsValid()) {
        throw Error(ErrorCode::kInvalidConfig, scene.id + ": invalid object localization");
      }
      scene.aoi_feature = Add(std::move(scene.aoi_feature), obj.feature, inv);
    }
    if (Norm(scene.aoi_feature) == 0.0) throw Error(ErrorCode::kInvalidConfig, scene.id + ": zero aoi feature");
  }
}

ToyEnvironment MakeAmbiguousSuite(const AmbiguousSuiteConfig& cfg) {
  const size_t n_objects = cfg.n_distractors + 1;
  if (cfg.n_distractors < 1 || cfg.n_distractors > kGridCols * kGridRows) {
    throw Error(ErrorCode::kInvalidConfig, "n_distractors must be in [1, 6]");
  }
  if (cfg.n_concepts < n_objects) {
    throw Error(ErrorCode::kInvalidConfig, "n_concepts must cover every object in a scene");
  }
  if (cfg.dim < cfg.n_concepts + 2) {
    throw Error(ErrorCode::kInvalidConfig, "dim must exceed n_concepts + 1 to leave room for jitter");
  }
  if (cfg.n_scenes == 0) throw Error(ErrorCode::kInvalidConfig, "n_scenes must be positive");

  ToyEnvironment env;
  env.dim = cfg.dim;
  env.noise_sigma = cfg.noise_sigma;
  env.rng_seed = cfg.seed;

  RngStream rng(RngStream::Key(cfg.seed, "suite", 0, 0));
  // Concept prototypes plus one background direction, mutually orthonormal.
  const auto basis = OrthonormalSet(rng, cfg.dim, cfg.n_concepts + 1);
  const std::vector<double>& bg = basis.back();
  auto jitter = [&](RngStream& r) {
    std::vector<double> j = GaussianVector(r, cfg.dim, cfg.feature_jitter);
    ProjectOut(j, basis);
    return j;
  };

  for (size_t c = 0; c < cfg.n_concepts; ++c) {
    std::vector<double> caption = Add(basis[c], bg, cfg.caption_context);
    Normalize(caption);
    env.caption_vocabulary.push_back(std::move(caption));
  }
  std::vector<double> context = bg;
  for (size_t c = 0; c < cfg.n_concepts; ++c) context = Add(std::move(context), basis[c]);
  Normalize(context);
  env.caption_vocabulary.push_back(std::move(context));

  for (size_t s = 0; s < cfg.n_scenes; ++s) {
    ToyScene scene;
    char id[32];
    std::snprintf(id, sizeof(id), "scene-%03zu", s);
    scene.id = id;
    RngStream r(RngStream::Key(cfg.seed, scene.id, 0, 0));

    std::vector<size_t> concepts(cfg.n_concepts);
    for (size_t c = 0; c < concepts.size(); ++c) concepts[c] = c;
    for (size_t c = 0; c < n_objects; ++c) {
      const size_t pick = c + static_cast<size_t>(r.NextUniform() * static_cast<double>(concepts.size() - c));
      std::swap(concepts[c], concepts[pick]);
    }

    // Slot 0 is the target, slot 1 its overlapping twin, the rest sit in
    // other grid cells.
    std::vector<ToyObject> slots(n_objects);
    slots[0].loc = RandomBoxInCell(r, 0);
    const double dx = std::round((2.0 * r.NextUniform() - 1.0) * kMaxTwinShift);
    const double dy = std::round((2.0 * r.NextUniform() - 1.0) * kMaxTwinShift);
    slots[1].loc = slots[0].loc.Translated(dx == 0.0 && dy == 0.0 ? 1.0 : dx, dy);
    for (size_t k = 2; k < n_objects; ++k) slots[k].loc = RandomBoxInCell(r, k - 1);
    for (size_t k = 0; k < n_objects; ++k) slots[k].feature = Add(basis[concepts[k]], jitter(r));

    std::vector<size_t> order(n_objects);
    for (size_t k = 0; k < n_objects; ++k) order[k] = k;
    for (size_t k = n_objects - 1; k > 0; --k) {
      const size_t pick = static_cast<size_t>(r.NextUniform() * static_cast<double>(k + 1));
      std::swap(order[k], order[pick]);
    }
    for (size_t k = 0; k < n_objects; ++k) {
      if (order[k] == 0) scene.gt_index = k;
      scene.objects.push_back(slots[order[k]]);
    }
    scene.background = Add(jitter(r), bg, cfg.background_scale);
    env.scenes.push_back(std::move(scene));
  }
  env.Finalize();
  return env;
}

ToyEnvironment EnvironmentFromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "scenes document must be an object");
  try {
    return EnvironmentFromJsonUnchecked(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("scenes document: ") + e.what());
  }
}

nlohmann::ordered_json EnvironmentToJson(const ToyEnvironment& env) {
  ojson j;
  j["dim"] = env.dim;
  j["noise_sigma"] = env.noise_sigma;
  j["rng_seed"] = env.rng_seed;
  j["caption_vocabulary"] = env.caption_vocabulary;
  ojson scenes = ojson::array();
  for (const ToyScene& s : env.scenes) {
    ojson js;
    js["id"] = s.id;
    js["gt_index"] = s.gt_index;
    js["background"] = s.background;
    ojson objects = ojson::array();
    for (const ToyObject& o : s.objects) {
      objects.push_back(ojson{{"bbox", {o.loc.bbox.x1, o.loc.bbox.y1, o.loc.bbox.x2, o.loc.bbox.y2}},
                              {"points_1", {o.loc.p1.x, o.loc.p1.y}},
                              {"points_2", {o.loc.p2.x, o.loc.p2.y}},
                              {"feature", o.feature}});
    }
    js["objects"] = objects;
    scenes.push_back(js);
  }
  j["scenes"] = scenes;
  return j;
}

RewardBreakdown ScoreToyAction(const ToyEnvironment& env, size_t scene, size_t action,
                               const RewardConfig& cfg, RngStream* noise) {
  const ToyScene& sc = env.scenes.at(scene);
  const DiscriminativeScores scores = ToyScores(env, sc, action, noise);
  Rollout rollout;
  rollout.sample_id = sc.id;
  rollout.answer = sc.objects.at(env.ObjectOf(action)).loc;
  const FormatChecks well_formed{true, true, true};
  return ComposeReward(sc.id, well_formed, &rollout, std::nullopt, sc.objects[sc.gt_index].loc,
                       &scores, 0, cfg);
}

bool IsDiscriminativeAction(const ToyEnvironment& env, size_t scene, size_t action) {
  const ToyScene& sc = env.scenes.at(scene);
  const GeoBreakdown geo = GeoReward(sc.objects.at(env.ObjectOf(action)).loc,
                                     sc.objects[sc.gt_index].loc);
  return geo.score == 3.0 && ToyScores(env, sc, action, nullptr).r_dpad == 1.0;
}

std::vector<size_t> OptimalActions(const ToyEnvironment& env, size_t scene,
                                   const RewardConfig& cfg) {
  std::vector<double> r(env.action_count());
  for (size_t a = 0; a < r.size(); ++a) r[a] = ScoreToyAction(env, scene, a, cfg, nullptr).r_final;
  const double best = *std::max_element(r.begin(), r.end());
  std::vector<size_t> out;
  for (size_t a = 0; a < r.size(); ++a) {
    if (r[a] == best) out.push_back(a);
  }
  return out;
}

RolloutGroup SampleGroup(const ToyEnvironment& env, const ToyPolicy& policy, size_t scene,
                         uint64_t step, size_t group_size, const RewardConfig& cfg) {
  const ToyScene& sc = env.scenes.at(scene);
  const std::vector<double> p = policy.Probabilities(scene);
  RolloutGroup group;
  group.state_id = sc.id;
  group.row = scene;
  group.members.reserve(group_size);
  for (size_t m = 0; m < group_size; ++m) {
    RngStream rng(RngStream::Key(env.rng_seed, sc.id, step, m));
    const double u = rng.NextUniform();
    size_t action = 0;
    double cum = 0.0;
    size_t last_positive = 0;
    for (; action < p.size(); ++action) {
      if (p[action] > 0.0) last_positive = action;
      cum += p[action];
      if (u < cum) break;
    }
    if (action == p.size()) action = last_positive;  // rounding left u past the total
    const RewardBreakdown b = ScoreToyAction(env, scene, action, cfg, &rng);
    group.members.push_back({action, p[action], b.r_final, b.dpad ? b.dpad->delta : 0.0});
  }
  return group;
}

RewardConfig TrainConfig::Reward() const {
  RewardConfig r;
  r.dpad_variant = variant;
  return r;
}

TrainConfig TrainConfigFromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "training config must be an object");
  static const std::set<std::string> kKnown = {
      "variant", "steps", "group_size", "batch_scenes", "update_epochs", "learning_rate",
      "clip_epsilon", "noise_sigma", "seed", "scenes_file", "suite"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) throw Error(ErrorCode::kInvalidConfig, "unknown key: " + key);
  }
  TrainConfig cfg;
  if (j.contains("variant")) {
    const auto v = j["variant"].is_string() ? ParseVariant(j["variant"].get<std::string>()) : std::nullopt;
    if (!v) throw Error(ErrorCode::kInvalidConfig, "variant must be binary|difference|scaled|off");
    cfg.variant = *v;
  }
  if (j.contains("steps")) cfg.steps = GetUnsigned(j, "steps");
  if (j.contains("group_size")) cfg.group_size = GetUnsigned(j, "group_size");
  if (j.contains("batch_scenes")) cfg.batch_scenes = GetUnsigned(j, "batch_scenes");
  if (j.contains("update_epochs")) cfg.update_epochs = GetUnsigned(j, "update_epochs");
  if (j.contains("learning_rate")) cfg.learning_rate = GetDouble(j, "learning_rate");
  if (j.contains("clip_epsilon")) cfg.clip_epsilon = GetDouble(j, "clip_epsilon");
  if (j.contains("noise_sigma")) cfg.noise_sigma = GetDouble(j, "noise_sigma");
  if (j.contains("seed")) cfg.seed = GetUnsigned(j, "seed");
  if (j.contains("scenes_file") && !j["scenes_file"].is_null()) {
    if (!j["scenes_file"].is_string()) throw Error(ErrorCode::kInvalidConfig, "scenes_file must be a path");
    cfg.scenes_file = j["scenes_file"].get<std::string>();
  }
  if (j.contains("suite")) {
    const json& s = j["suite"];
    if (!s.is_object()) throw Error(ErrorCode::kInvalidConfig, "suite must be an object");
    AmbiguousSuiteConfig& sc = cfg.suite;
    if (s.contains("n_scenes")) sc.n_scenes = GetUnsigned(s, "n_scenes");
    if (s.contains("n_distractors")) sc.n_distractors = GetUnsigned(s, "n_distractors");
    if (s.contains("dim")) sc.dim = static_cast<uint32_t>(GetUnsigned(s, "dim"));
    if (s.contains("n_concepts")) sc.n_concepts = GetUnsigned(s, "n_concepts");
    if (s.contains("background_scale")) sc.background_scale = GetDouble(s, "background_scale");
    if (s.contains("caption_context")) sc.caption_context = GetDouble(s, "caption_context");
    if (s.contains("feature_jitter")) sc.feature_jitter = GetDouble(s, "feature_jitter");
    if (s.contains("seed")) cfg.suite_seed = GetUnsigned(s, "seed");
  }
  if (cfg.group_size < 2) throw Error(ErrorCode::kInvalidConfig, "group_size must be >= 2");
  if (cfg.batch_scenes < 1) throw Error(ErrorCode::kInvalidConfig, "batch_scenes must be >= 1");
  if (cfg.update_epochs < 1) throw Error(ErrorCode::kInvalidConfig, "update_epochs must be >= 1");
  return cfg;
}

nlohmann::ordered_json TrainConfigToJson(const TrainConfig& cfg) {
  ojson j;
  j["variant"] = VariantName(cfg.variant);
  j["steps"] = cfg.steps;
  j["group_size"] = cfg.group_size;
  j["batch_scenes"] = cfg.batch_scenes;
  j["update_epochs"] = cfg.update_epochs;
  j["learning_rate"] = cfg.learning_rate;
  j["clip_epsilon"] = cfg.clip_epsilon;
  j["noise_sigma"] = cfg.noise_sigma;
  j["seed"] = cfg.seed;
  j["scenes_file"] = cfg.scenes_file.empty() ? ojson(nullptr) : ojson(cfg.scenes_file);
  const AmbiguousSuiteConfig& s = cfg.suite;
  j["suite"] = ojson{{"n_scenes", s.n_scenes},
                     {"n_distractors", s.n_distractors},
                     {"dim", s.dim},
                     {"n_concepts", s.n_concepts},
                     {"background_scale", s.background_scale},
                     {"caption_context", s.caption_context},
                     {"feature_jitter", s.feature_jitter},
                     {"seed", cfg.suite_seed.value_or(cfg.seed)}};
  return j;
}

std::string TrainingTrace::ToCsv() const {
  std::string out = "step,mean_reward,accuracy,mean_delta\n";
  for (const TraceRow& r : rows) {
    out += std::to_string(r.step);
    out += ',';
    AppendShortest(out, r.mean_reward);
    out += ',';
    AppendShortest(out, r.accuracy);
    out += ',';
    AppendShortest(out, r.mean_delta);
    out += '\n';
  }
  return out;
}

TraceRow EvaluatePolicy(const ToyEnvironment& env, const ToyPolicy& policy,
                        const RewardConfig& cfg, uint64_t step) {
  return Evaluate(BuildCleanTable(env, cfg), policy, step);
}

TrainingTrace Train(const ToyEnvironment& env, const TrainConfig& cfg) {
  if (cfg.group_size < 2) throw Error(ErrorCode::kGroupTooSmall, "group_size must be >= 2");
  if (cfg.batch_scenes < 1 || cfg.batch_scenes > env.scenes.size()) {
    throw Error(ErrorCode::kInvalidConfig, "batch_scenes must be in [1, scene count]");
  }
  const RewardConfig reward = cfg.Reward();
  const CleanTable table = BuildCleanTable(env, reward);
  ToyPolicy policy(env.scenes.size(), env.action_count(), cfg.learning_rate, cfg.clip_epsilon);

  TrainingTrace trace;
  trace.rows.push_back(Evaluate(table, policy, 0));
  for (uint64_t step = 1; step <= cfg.steps; ++step) {
    for (size_t b = 0; b < cfg.batch_scenes; ++b) {
      const size_t scene = static_cast<size_t>(((step - 1) * cfg.batch_scenes + b) % env.scenes.size());
      const RolloutGroup group = SampleGroup(env, policy, scene, step, cfg.group_size, reward);
      const std::vector<double> adv = GroupAdvantages(group.Rewards());
      for (size_t e = 0; e < cfg.update_epochs; ++e) policy = PolicyUpdate(std::move(policy), group, adv);
    }
    trace.rows.push_back(Evaluate(table, policy, step));
  }
  return trace;
}

ToyEnvironment EnvironmentForConfig(const TrainConfig& cfg, const std::filesystem::path& base_dir) {
  ToyEnvironment env;
  if (cfg.scenes_file.empty()) {
    AmbiguousSuiteConfig suite = cfg.suite;
    suite.seed = cfg.suite_seed.value_or(cfg.seed);
    suite.noise_sigma = cfg.noise_sigma;
    env = MakeAmbiguousSuite(suite);
  } else {
    std::filesystem::path path = cfg.scenes_file;
    if (path.is_relative()) path = base_dir / path;
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::kIoError, "cannot open scenes file " + path.string());
    json doc;
    try {
      doc = json::parse(f);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
    }
    env = EnvironmentFromJson(doc);
    env.noise_sigma = cfg.noise_sigma;
  }
  env.rng_seed = cfg.seed;
  return env;
}

}  // namespace dpad
