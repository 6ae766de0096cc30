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

// Caption/region similarity scoring: cosine similarity, the discriminative
// margin between the target crop and the whole image, and the reward
// variants built on it.

#ifndef DPAD_SEMANTICS_H_
#define DPAD_SEMANTICS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpad {

enum class Role { kCaption, kRoi, kAoi, kThink };

std::string_view RoleName(Role role);
std::optional<Role> ParseRole(std::string_view name);

struct EmbeddingRecord {
  std::string sample_id;
  Role role = Role::kCaption;
  std::vector<float> vector;
};

// Plain cosine similarity, no temperature. Throws kDimMismatch, kZeroNorm,
// or kNonFinite. The result is clamped to [-1, 1].
double Cosine(std::span<const float> text, std::span<const float> image);
double Cosine(std::span<const double> text, std::span<const double> image);

struct DiscriminativeScores {
  double s1 = 0.0;     // caption vs target crop
  double s2 = 0.0;     // caption vs full image
  double delta = 0.0;  // max(0, s1 - s2)
  double r_dpad = 0.0; // 1 iff delta > 0, no tolerance band
};

DiscriminativeScores ScoresFromSimilarities(double s1, double s2);

// cap/roi/aoi must share a sample id and carry the matching roles
// (kRoleMismatch otherwise).
DiscriminativeScores ComputeDiscriminativeScores(const EmbeddingRecord& cap,
                                                 const EmbeddingRecord& roi,
                                                 const EmbeddingRecord& aoi);

enum class DpadVariant { kBinary, kDifference, kScaled, kOff };

std::string_view VariantName(DpadVariant variant);
std::optional<DpadVariant> ParseVariant(std::string_view name);

// binary: r_dpad; difference: s1 - s2 (may be negative);
// scaled: s1 * max(0, s1 - s2); off: 0.
double VariantReward(const DiscriminativeScores& scores, DpadVariant variant);

struct ThinkScores {
  double ts1 = 0.0;
  double ts2 = 0.0;
};

ThinkScores ComputeThinkScores(const EmbeddingRecord& think, const EmbeddingRecord& roi,
                               const EmbeddingRecord& aoi);

}  // namespace dpad

#endif  // DPAD_SEMANTICS_H_
