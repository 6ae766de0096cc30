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

#include <cmath>
#include <limits>
#include <random>

#include "dpad/error.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace dpad {
namespace {

double Cos(std::vector<float> a, std::vector<float> b) { return Cosine(std::span<const float>(a), b); }

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

TEST(CosineTest, Examples) {
  EXPECT_EQ(Cos({1, 0}, {1, 0}), 1.0);
  EXPECT_EQ(Cos({1, 0}, {0, 1}), 0.0);
  EXPECT_NEAR(Cos({3, 4}, {4, 3}), 0.96, 1e-15);
  EXPECT_EQ(Cos({1, 0}, {-1, 0}), -1.0);
}

TEST(CosineTest, Errors) {
  EXPECT_EQ(CodeOf([] { Cos({1, 0}, {1, 0, 0}); }), ErrorCode::kDimMismatch);
  EXPECT_EQ(CodeOf([] { Cos({0, 0}, {1, 0}); }), ErrorCode::kZeroNorm);
  EXPECT_EQ(CodeOf([] { Cos({1, 0}, {0, 0}); }), ErrorCode::kZeroNorm);
  EXPECT_EQ(CodeOf([] { Cos({std::numeric_limits<float>::quiet_NaN(), 0}, {1, 0}); }),
            ErrorCode::kNonFinite);
}

TEST(CosineTest, MatchesHighPrecisionOracleAndStaysInRange) {
  std::mt19937_64 rng(21);
  std::normal_distribution<float> n(0.f, 1.f);
  for (int i = 0; i < 2000; ++i) {
    const size_t dim = 1 + rng() % 600;
    std::vector<float> a(dim), b(dim);
    for (size_t k = 0; k < dim; ++k) {
      a[k] = n(rng);
      b[k] = (i % 3 == 0) ? a[k] : n(rng);  // some exact self-pairs
    }
    const double c = Cos(a, b);
    EXPECT_NEAR(c, double(oracle::Cosine(a, b)), 1e-12);
    EXPECT_LE(c, 1.0);
    EXPECT_GE(c, -1.0);
  }
}

TEST(CosineTest, ScaleInvariance) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(16), w(16), sv(16), sw(16);
    const double alpha = scale(rng), beta = scale(rng);
    for (int k = 0; k < 16; ++k) {
      v[k] = u(rng);
      w[k] = u(rng);
      sv[k] = alpha * v[k];
      sw[k] = beta * w[k];
    }
    EXPECT_NEAR(Cosine(std::span<const double>(v), w), Cosine(std::span<const double>(sv), sw), 1e-12);
  }
}

TEST(DiscriminativeScoresTest, Examples) {
  const DiscriminativeScores d = ScoresFromSimilarities(0.2554, 0.2277);
  EXPECT_NEAR(d.delta, 0.0277, 1e-15);
  EXPECT_EQ(d.r_dpad, 1.0);
  EXPECT_EQ(ScoresFromSimilarities(0.3, 0.3).delta, 0.0);
  EXPECT_EQ(ScoresFromSimilarities(0.3, 0.3).r_dpad, 0.0);
  EXPECT_EQ(ScoresFromSimilarities(0.20, 0.25).delta, 0.0);
  EXPECT_EQ(ScoresFromSimilarities(0.20, 0.25).r_dpad, 0.0);
  // No tolerance band: the smallest positive margin counts.
  EXPECT_EQ(ScoresFromSimilarities(std::nextafter(0.5, 1.0), 0.5).r_dpad, 1.0);
}

TEST(DiscriminativeScoresTest, AlgebraOnRandomPairs) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double s1 = u(rng), s2 = (i % 10 == 0) ? s1 : u(rng);
    const DiscriminativeScores d = ScoresFromSimilarities(s1, s2);
    EXPECT_EQ(d.delta, std::max(0.0, s1 - s2));
    EXPECT_EQ(d.r_dpad, d.delta > 0 ? 1.0 : 0.0);
  }
}

TEST(DiscriminativeScoresTest, FromRecordsChecksRoles) {
  const EmbeddingRecord cap{"a", Role::kCaption, {1, 1, 0}};
  const EmbeddingRecord roi{"a", Role::kRoi, {1, 1, 0.1f}};
  const EmbeddingRecord aoi{"a", Role::kAoi, {1, 0, 1}};
  const DiscriminativeScores d = ComputeDiscriminativeScores(cap, roi, aoi);
  EXPECT_GT(d.s1, d.s2);
  EXPECT_EQ(d.r_dpad, 1.0);
  EXPECT_EQ(CodeOf([&] { ComputeDiscriminativeScores(roi, cap, aoi); }), ErrorCode::kRoleMismatch);
  const EmbeddingRecord other{"b", Role::kAoi, {1, 0, 1}};
  EXPECT_EQ(CodeOf([&] { ComputeDiscriminativeScores(cap, roi, other); }), ErrorCode::kRoleMismatch);
}

TEST(VariantTest, Rewards) {
  const DiscriminativeScores d = ScoresFromSimilarities(0.2554, 0.2277);
  EXPECT_EQ(VariantReward(d, DpadVariant::kBinary), 1.0);
  EXPECT_NEAR(VariantReward(d, DpadVariant::kDifference), 0.0277, 1e-15);
  EXPECT_NEAR(VariantReward(d, DpadVariant::kScaled), 0.2554 * 0.0277, 1e-15);
  EXPECT_NEAR(VariantReward(d, DpadVariant::kScaled), 0.0070746, 1e-7);
  EXPECT_EQ(VariantReward(d, DpadVariant::kOff), 0.0);
  const DiscriminativeScores worse = ScoresFromSimilarities(0.2, 0.25);
  EXPECT_NEAR(VariantReward(worse, DpadVariant::kDifference), -0.05, 1e-15);
  EXPECT_EQ(VariantReward(worse, DpadVariant::kScaled), 0.0);
  for (DpadVariant v : {DpadVariant::kBinary, DpadVariant::kDifference, DpadVariant::kScaled,
                        DpadVariant::kOff}) {
    EXPECT_EQ(ParseVariant(VariantName(v)), v);
  }
  EXPECT_FALSE(ParseVariant("ratio").has_value());
}

TEST(ThinkScoresTest, Examples) {
  const EmbeddingRecord roi{"a", Role::kRoi, {1, 0, 0}};
  const EmbeddingRecord aoi{"a", Role::kAoi, {0, 1, 0}};
  const ThinkScores same = ComputeThinkScores({"a", Role::kThink, {1, 0, 0}}, roi, aoi);
  EXPECT_EQ(same.ts1, 1.0);
  const ThinkScores orth = ComputeThinkScores({"a", Role::kThink, {0, 0, 1}}, roi, aoi);
  EXPECT_EQ(orth.ts1, 0.0);
  EXPECT_EQ(orth.ts2, 0.0);
}

TEST(RoleTest, Names) {
  for (Role r : {Role::kCaption, Role::kRoi, Role::kAoi, Role::kThink}) {
    EXPECT_EQ(ParseRole(RoleName(r)), r);
  }
  EXPECT_FALSE(ParseRole("image").has_value());
}

}  // namespace
}  // namespace dpad
