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

#include <bit>
#include <random>
#include <vector>

#include "dpad/simd/kernels.h"
#include "gtest/gtest.h"

namespace dpad::simd {
namespace {

std::vector<const KernelTable*> VectorTables() {
  std::vector<const KernelTable*> out;
  if (const KernelTable* t = Avx2Kernels()) out.push_back(t);
  if (const KernelTable* t = NeonKernels()) out.push_back(t);
  return out;
}

TEST(SimdTest, ScalarDotMatchesNaiveOnExactInputs) {
  // Small integers: every partial sum is exact, so summation order is moot.
  std::vector<float> a, b;
  double naive = 0;
  for (int i = 0; i < 37; ++i) {
    a.push_back(float(i % 7 - 3));
    b.push_back(float(i % 5 - 2));
    naive += double(a.back()) * b.back();
  }
  EXPECT_EQ(ScalarKernels().dot_f32(a.data(), b.data(), a.size()), naive);
}

TEST(SimdTest, DotBitIdenticalAcrossTargets) {
  const auto tables = VectorTables();
  if (tables.empty()) GTEST_SKIP() << "no vector target on this CPU";
  std::mt19937_64 rng(11);
  std::normal_distribution<float> nf(0.f, 1.f);
  for (size_t n : {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 31, 64, 512, 513, 1000}) {
    std::vector<float> a(n), b(n);
    std::vector<double> da(n), db(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = nf(rng);
      b[i] = nf(rng) * 1e3f;
      da[i] = double(nf(rng)) * 1e-3;
      db[i] = nf(rng);
    }
    const double ref32 = ScalarKernels().dot_f32(a.data(), b.data(), n);
    const double ref64 = ScalarKernels().dot_f64(da.data(), db.data(), n);
    for (const KernelTable* t : tables) {
      EXPECT_EQ(std::bit_cast<uint64_t>(t->dot_f32(a.data(), b.data(), n)),
                std::bit_cast<uint64_t>(ref32))
          << t->name << " n=" << n;
      EXPECT_EQ(std::bit_cast<uint64_t>(t->dot_f64(da.data(), db.data(), n)),
                std::bit_cast<uint64_t>(ref64))
          << t->name << " n=" << n;
    }
  }
}

TEST(SimdTest, OverlapMatchesNaive) {
  std::mt19937_64 rng(5);
  for (size_t n : {0, 1, 31, 32, 33, 63, 64, 65, 1000, 4096 + 7}) {
    std::vector<uint8_t> a(n), b(n);
    uint64_t inter = 0, uni = 0;
    for (size_t i = 0; i < n; ++i) {
      // Any nonzero byte is foreground, not just 1.
      a[i] = rng() % 3 == 0 ? uint8_t(rng() % 255 + 1) : 0;
      b[i] = rng() % 2 == 0 ? uint8_t(rng() % 255 + 1) : 0;
      inter += (a[i] && b[i]);
      uni += (a[i] || b[i]);
    }
    const OverlapCounts expect{inter, uni};
    EXPECT_EQ(ScalarKernels().overlap_u8(a.data(), b.data(), n), expect) << n;
    for (const KernelTable* t : VectorTables()) {
      EXPECT_EQ(t->overlap_u8(a.data(), b.data(), n), expect) << t->name << " n=" << n;
    }
  }
}

TEST(SimdTest, ActiveTableIsOneOfTheKnownTargets) {
  const std::string_view name = ActiveKernels().name;
  EXPECT_TRUE(name == "scalar" || name == "avx2" || name == "neon") << name;
}

}  // namespace
}  // namespace dpad::simd
