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

// Group-relative advantages and a clipped-surrogate update for a tabular
// softmax policy.

#ifndef DPAD_GRPO_H_
#define DPAD_GRPO_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dpad {

inline constexpr double kAdvantageEpsilon = 1e-6;

// a_i = (r_i - mean) / max(std, eps) with the population standard deviation.
// A constant group yields all zeros. Throws kGroupTooSmall below two members
// and kNonFinite on non-finite rewards.
std::vector<double> GroupAdvantages(std::span<const double> rewards,
                                    double eps = kAdvantageEpsilon);

// Logit table with one row per state bucket and one column per joint action.
class ToyPolicy {
 public:
  ToyPolicy(size_t rows, size_t actions, double learning_rate, double clip_epsilon);

  size_t rows() const { return rows_; }
  size_t actions() const { return actions_; }
  double learning_rate() const { return learning_rate_; }
  double clip_epsilon() const { return clip_epsilon_; }

  std::span<double> Logits(size_t row);
  std::span<const double> Logits(size_t row) const;
  std::vector<double> Probabilities(size_t row) const;

  // Index of the largest logit; the lowest index wins ties.
  size_t Greedy(size_t row) const;

  const std::vector<double>& parameters() const { return logits_; }

 private:
  size_t rows_;
  size_t actions_;
  double learning_rate_;
  double clip_epsilon_;
  std::vector<double> logits_;
};

struct GroupMember {
  size_t action = 0;
  double sampling_prob = 0.0;  // pi_old(action), frozen at sampling time
  double reward = 0.0;
  double delta = 0.0;          // noisy discriminative margin of this sample
};

struct RolloutGroup {
  std::string state_id;
  size_t row = 0;
  std::vector<GroupMember> members;

  std::vector<double> Rewards() const;
};

// J = (1/G) sum_i min(r_i A_i, clip(r_i, 1-eps, 1+eps) A_i),
// r_i = pi(a_i) / pi_old(a_i).
double SurrogateObjective(const ToyPolicy& policy, const RolloutGroup& group,
                          std::span<const double> advantages);

// dJ/dlogits for the group's row.
std::vector<double> SurrogateGradient(const ToyPolicy& policy, const RolloutGroup& group,
                                      std::span<const double> advantages);

// One ascent step of learning_rate * dJ/dlogits. Throws kNonFiniteGradient.
ToyPolicy PolicyUpdate(ToyPolicy policy, const RolloutGroup& group,
                       std::span<const double> advantages);

}  // namespace dpad

#endif  // DPAD_GRPO_H_
