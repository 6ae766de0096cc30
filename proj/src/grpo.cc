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

#include "dpad/grpo.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpad/error.h"

namespace dpad {
namespace {

void CheckGroup(const ToyPolicy& policy, const RolloutGroup& group,
                std::span<const double> advantages) {
  if (advantages.size() != group.members.size()) {
    throw Error(ErrorCode::kDimMismatch, "advantages and group members differ in length");
  }
  if (group.row >= policy.rows()) throw Error(ErrorCode::kDimMismatch, "group row out of range");
  for (const GroupMember& m : group.members) {
    if (m.action >= policy.actions()) throw Error(ErrorCode::kDimMismatch, "action out of range");
    if (!(m.sampling_prob > 0.0)) {
      throw Error(ErrorCode::kNonFinite, "sampling probability must be positive");
    }
  }
}

}  // namespace

std::vector<double> GroupAdvantages(std::span<const double> rewards, double eps) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kGroupTooSmall,
                "group needs at least 2 members, got " + std::to_string(rewards.size()));
  }
  double sum = 0.0;
  for (double r : rewards) {
    if (!std::isfinite(r)) throw Error(ErrorCode::kNonFinite, "non-finite reward in group");
    sum += r;
  }
  const double n = static_cast<double>(rewards.size());
  const double mean = sum / n;
  double sq = 0.0;
  bool constant = true;
  for (double r : rewards) {
    sq += (r - mean) * (r - mean);
    constant = constant && r == rewards[0];
  }
  std::vector<double> adv(rewards.size(), 0.0);
  if (constant) return adv;
  const double scale = std::max(std::sqrt(sq / n), eps);
  for (size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / scale;
  return adv;
}

ToyPolicy::ToyPolicy(size_t rows, size_t actions, double learning_rate, double clip_epsilon)
    : rows_(rows),
      actions_(actions),
      learning_rate_(learning_rate),
      clip_epsilon_(clip_epsilon),
      logits_(rows * actions, 0.0) {
  if (rows == 0 || actions == 0) throw Error(ErrorCode::kInvalidConfig, "empty policy table");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidConfig, "learning_rate must be positive");
  }
  if (!(clip_epsilon > 0.0) || !std::isfinite(clip_epsilon)) {
    throw Error(ErrorCode::kInvalidConfig, "clip_epsilon must be positive");
  }
}

std::span<double> ToyPolicy::Logits(size_t row) {
  return std::span<double>(logits_).subspan(row * actions_, actions_);
}

std::span<const double> ToyPolicy::Logits(size_t row) const {
  return std::span<const double>(logits_).subspan(row * actions_, actions_);
}

std::vector<double> ToyPolicy::Probabilities(size_t row) const {
  const auto z = Logits(row);
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> p(actions_);
  double total = 0.0;
  for (size_t a = 0; a < actions_; ++a) {
    p[a] = std::exp(z[a] - top);
    total += p[a];
  }
  for (double& v : p) v /= total;
  return p;
}

size_t ToyPolicy::Greedy(size_t row) const {
  const auto z = Logits(row);
  return static_cast<size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

std::vector<double> RolloutGroup::Rewards() const {
  std::vector<double> r;
  r.reserve(members.size());
  for (const GroupMember& m : members) r.push_back(m.reward);
  return r;
}

double SurrogateObjective(const ToyPolicy& policy, const RolloutGroup& group,
                          std::span<const double> advantages) {
  CheckGroup(policy, group, advantages);
  const std::vector<double> p = policy.Probabilities(group.row);
  const double eps = policy.clip_epsilon();
  double total = 0.0;
  for (size_t i = 0; i < group.members.size(); ++i) {
    const GroupMember& m = group.members[i];
    const double ratio = p[m.action] / m.sampling_prob;
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    total += std::min(ratio * advantages[i], clipped * advantages[i]);
  }
  return total / static_cast<double>(group.members.size());
}

std::vector<double> SurrogateGradient(const ToyPolicy& policy, const RolloutGroup& group,
                                      std::span<const double> advantages) {
  CheckGroup(policy, group, advantages);
  const std::vector<double> p = policy.Probabilities(group.row);
  const double eps = policy.clip_epsilon();
  std::vector<double> grad(policy.actions(), 0.0);
  for (size_t i = 0; i < group.members.size(); ++i) {
    const GroupMember& m = group.members[i];
    const double adv = advantages[i];
    const double ratio = p[m.action] / m.sampling_prob;
    // The min selects the clipped constant (zero gradient) once the ratio has
    // moved past the trust region in the advantage's direction.
    const bool active = adv >= 0.0 ? ratio <= 1.0 + eps : ratio >= 1.0 - eps;
    if (!active || adv == 0.0) continue;
    // d ratio / d z_k = ratio * (1[k == a] - p_k)
    const double w = adv * ratio;
    for (size_t k = 0; k < grad.size(); ++k) grad[k] -= w * p[k];
    grad[m.action] += w;
  }
  const double inv = 1.0 / static_cast<double>(group.members.size());
  for (double& g : grad) g *= inv;
  return grad;
}

ToyPolicy PolicyUpdate(ToyPolicy policy, const RolloutGroup& group,
                       std::span<const double> advantages) {
  const std::vector<double> grad = SurrogateGradient(policy, group, advantages);
  for (double g : grad) {
    if (!std::isfinite(g)) throw Error(ErrorCode::kNonFiniteGradient, group.state_id);
  }
  auto z = policy.Logits(group.row);
  for (size_t k = 0; k < z.size(); ++k) z[k] += policy.learning_rate() * grad[k];
  return policy;
}

}  // namespace dpad
