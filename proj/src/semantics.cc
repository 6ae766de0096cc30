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

#include "dpad/semantics.h"

#include <algorithm>
#include <cmath>

#include "dpad/error.h"
#include "dpad/simd/kernels.h"

namespace dpad {
namespace {

template <typename T>
double CosineImpl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const double ab = simd::Dot(a, b);
  const double aa = simd::Dot(a, a);
  const double bb = simd::Dot(b, b);
  if (!std::isfinite(ab) || !std::isfinite(aa) || !std::isfinite(bb)) {
    throw Error(ErrorCode::kNonFinite, "vector contains non-finite entries");
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::kZeroNorm, "cosine of a zero vector");
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

void ExpectRole(const EmbeddingRecord& r, Role role) {
  if (r.role != role) {
    throw Error(ErrorCode::kRoleMismatch, "expected role " + std::string(RoleName(role)) +
                                              ", got " + std::string(RoleName(r.role)));
  }
}

void ExpectSameSample(const EmbeddingRecord& a, const EmbeddingRecord& b) {
  if (a.sample_id != b.sample_id) {
    throw Error(ErrorCode::kRoleMismatch,
                "records belong to different samples: " + a.sample_id + ", " + b.sample_id);
  }
}

}  // namespace

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kCaption: return "caption";
    case Role::kRoi: return "roi";
    case Role::kAoi: return "aoi";
    case Role::kThink: return "think";
  }
  return "unknown";
}

std::optional<Role> ParseRole(std::string_view name) {
  if (name == "caption") return Role::kCaption;
  if (name == "roi") return Role::kRoi;
  if (name == "aoi") return Role::kAoi;
  if (name == "think") return Role::kThink;
  return std::nullopt;
}

double Cosine(std::span<const float> text, std::span<const float> image) {
  return CosineImpl(text, image);
}

double Cosine(std::span<const double> text, std::span<const double> image) {
  return CosineImpl(text, image);
}

DiscriminativeScores ScoresFromSimilarities(double s1, double s2) {
  DiscriminativeScores s;
  s.s1 = s1;
  s.s2 = s2;
  s.delta = std::max(0.0, s1 - s2);
  s.r_dpad = s.delta > 0.0 ? 1.0 : 0.0;
  return s;
}

DiscriminativeScores ComputeDiscriminativeScores(const EmbeddingRecord& cap,
                                                 const EmbeddingRecord& roi,
                                                 const EmbeddingRecord& aoi) {
  ExpectRole(cap, Role::kCaption);
  ExpectRole(roi, Role::kRoi);
  ExpectRole(aoi, Role::kAoi);
  ExpectSameSample(cap, roi);
  ExpectSameSample(cap, aoi);
  return ScoresFromSimilarities(Cosine(cap.vector, roi.vector), Cosine(cap.vector, aoi.vector));
}

std::string_view VariantName(DpadVariant variant) {
  switch (variant) {
    case DpadVariant::kBinary: return "binary";
    case DpadVariant::kDifference: return "difference";
    case DpadVariant::kScaled: return "scaled";
    case DpadVariant::kOff: return "off";
  }
  return "unknown";
}

std::optional<DpadVariant> ParseVariant(std::string_view name) {
  if (name == "binary") return DpadVariant::kBinary;
  if (name == "difference") return DpadVariant::kDifference;
  if (name == "scaled") return DpadVariant::kScaled;
  if (name == "off") return DpadVariant::kOff;
  return std::nullopt;
}

double VariantReward(const DiscriminativeScores& scores, DpadVariant variant) {
  switch (variant) {
    case DpadVariant::kBinary: return scores.r_dpad;
    case DpadVariant::kDifference: return scores.s1 - scores.s2;
    case DpadVariant::kScaled: return scores.s1 * std::max(0.0, scores.s1 - scores.s2);
    case DpadVariant::kOff: return 0.0;
  }
  return 0.0;
}

ThinkScores ComputeThinkScores(const EmbeddingRecord& think, const EmbeddingRecord& roi,
                               const EmbeddingRecord& aoi) {
  ExpectRole(think, Role::kThink);
  ExpectRole(roi, Role::kRoi);
  ExpectRole(aoi, Role::kAoi);
  ExpectSameSample(think, roi);
  ExpectSameSample(think, aoi);
  return {Cosine(think.vector, roi.vector), Cosine(think.vector, aoi.vector)};
}

}  // namespace dpad
