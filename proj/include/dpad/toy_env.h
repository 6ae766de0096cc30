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

// Synthetic discrimination environment and trainer.
//
// Images are replaced by feature vectors: each scene holds a few objects with
// a box, two key points, and a feature; the whole-image feature is the mean
// of the object features plus a background vector. A joint action picks an
// object (its box becomes the localization) and a caption from a shared
// vocabulary (its vector, plus optional Gaussian noise, becomes the caption
// embedding). Rewards go through the regular reward composer with the
// target object's feature as the crop embedding.

#ifndef DPAD_TOY_ENV_H_
#define DPAD_TOY_ENV_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpad/geometry.h"
#include "dpad/grpo.h"
#include "dpad/reward_composer.h"
#include "dpad/semantics.h"
#include "json.hpp"

namespace dpad {

// Counter-based generator: the value at position i of a stream is a pure
// function of (key, i), so draws never depend on scheduling or platform.
class RngStream {
 public:
  explicit RngStream(uint64_t key) : key_(key) {}

  // Stream key for (seed, state_id, step, member).
  static uint64_t Key(uint64_t seed, std::string_view state_id, uint64_t step, uint64_t member);

  uint64_t NextU64();
  double NextUniform();  // [0, 1), 53-bit resolution
  double NextNormal();   // standard normal via Box-Muller

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

struct ToyObject {
  Localization loc;
  std::vector<double> feature;
};

struct ToyScene {
  std::string id;
  std::vector<ToyObject> objects;
  size_t gt_index = 0;
  std::vector<double> background;
  std::vector<double> aoi_feature;  // mean(object features) + background

  const std::vector<double>& target_feature() const { return objects[gt_index].feature; }
};

struct ToyEnvironment {
  uint32_t dim = 0;
  std::vector<ToyScene> scenes;
  std::vector<std::vector<double>> caption_vocabulary;
  double noise_sigma = 0.0;
  uint64_t rng_seed = 0;

  size_t objects_per_scene() const { return scenes.empty() ? 0 : scenes[0].objects.size(); }
  size_t action_count() const { return objects_per_scene() * caption_vocabulary.size(); }
  size_t ObjectOf(size_t action) const { return action / caption_vocabulary.size(); }
  size_t CaptionOf(size_t action) const { return action % caption_vocabulary.size(); }

  // Recomputes aoi features and checks dimensions, indices, and boxes.
  // Throws kInvalidConfig.
  void Finalize();
};

struct AmbiguousSuiteConfig {
  size_t n_scenes = 20;
  size_t n_distractors = 4;  // the first one is the overlapping twin
  uint32_t dim = 16;
  size_t n_concepts = 8;
  double background_scale = 0.5;
  double caption_context = 0.3;  // share of the background direction in captions
  double feature_jitter = 0.05;
  double noise_sigma = 0.05;
  uint64_t seed = 0;
};

// Every scene contains the target and a twin whose box overlaps the target's
// closely enough to earn the full geometric reward, so geometry alone cannot
// tell them apart. Only the caption naming the target's concept is closer to
// the target crop than to the whole image.
ToyEnvironment MakeAmbiguousSuite(const AmbiguousSuiteConfig& cfg);

ToyEnvironment EnvironmentFromJson(const nlohmann::json& j);
nlohmann::ordered_json EnvironmentToJson(const ToyEnvironment& env);

// Reward of one joint action. With noise == nullptr the caption embedding is
// the clean vocabulary vector.
RewardBreakdown ScoreToyAction(const ToyEnvironment& env, size_t scene, size_t action,
                               const RewardConfig& cfg, RngStream* noise);

// True when the action localizes with full geometric credit and its clean
// caption discriminates the target.
bool IsDiscriminativeAction(const ToyEnvironment& env, size_t scene, size_t action);

// Actions maximizing the clean reward for the scene under cfg.
std::vector<size_t> OptimalActions(const ToyEnvironment& env, size_t scene,
                                   const RewardConfig& cfg);

// Draws G members from the policy row of `scene`; member m uses the stream
// keyed (env.rng_seed, scene id, step, m).
RolloutGroup SampleGroup(const ToyEnvironment& env, const ToyPolicy& policy, size_t scene,
                         uint64_t step, size_t group_size, const RewardConfig& cfg);

struct TrainConfig {
  DpadVariant variant = DpadVariant::kBinary;
  uint64_t steps = 2000;
  size_t group_size = 8;
  size_t batch_scenes = 4;
  size_t update_epochs = 1;
  double learning_rate = 0.5;
  double clip_epsilon = 0.2;
  double noise_sigma = 0.05;
  uint64_t seed = 0;
  std::string scenes_file;  // empty: generate the ambiguous suite
  AmbiguousSuiteConfig suite;
  std::optional<uint64_t> suite_seed;  // defaults to `seed`

  RewardConfig Reward() const;
};

TrainConfig TrainConfigFromJson(const nlohmann::json& j);
nlohmann::ordered_json TrainConfigToJson(const TrainConfig& cfg);

struct TraceRow {
  uint64_t step = 0;
  double mean_reward = 0.0;    // expected clean reward under the policy
  double accuracy = 0.0;       // share of scenes whose greedy action discriminates
  double mean_delta = 0.0;     // expected clean caption margin under the policy
  double optimal_mass = 0.0;   // probability on the enumerated optimal actions
};

struct TrainingTrace {
  std::vector<TraceRow> rows;  // row 0 is the initial policy

  std::string ToCsv() const;
};

TraceRow EvaluatePolicy(const ToyEnvironment& env, const ToyPolicy& policy,
                        const RewardConfig& cfg, uint64_t step);

TrainingTrace Train(const ToyEnvironment& env, const TrainConfig& cfg);

// Builds the environment a config describes (generated suite or scenes file).
ToyEnvironment EnvironmentForConfig(const TrainConfig& cfg,
                                    const std::filesystem::path& base_dir = {});

}  // namespace dpad

#endif  // DPAD_TOY_ENV_H_
