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

// AArch64 only. NEON is mandatory there, so no runtime probe is needed.
// Two float64x2 accumulators hold reference lanes {0,1} and {2,3}.

#include <arm_neon.h>

#include "kernels_internal.h"

namespace dpad::simd {
namespace {

double Reduce(float64x2_t lo, float64x2_t hi) {
  return (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
         (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
}

double DotF32(const float* a, const float* b, size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t va = vld1q_f32(a + i);
    const float32x4_t vb = vld1q_f32(b + i);
    lo = vaddq_f64(lo, vmulq_f64(vcvt_f64_f32(vget_low_f32(va)), vcvt_f64_f32(vget_low_f32(vb))));
    hi = vaddq_f64(hi, vmulq_f64(vcvt_high_f64_f32(va), vcvt_high_f64_f32(vb)));
  }
  double sum = Reduce(lo, hi);
  for (; i < n; ++i) {
    sum = sum + static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

double DotF64(const double* a, const double* b, size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double sum = Reduce(lo, hi);
  for (; i < n; ++i) {
    sum = sum + a[i] * b[i];
  }
  return sum;
}

OverlapCounts OverlapU8(const uint8_t* a, const uint8_t* b, size_t n) {
  OverlapCounts c;
  size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t na = vtstq_u8(vld1q_u8(a + i), vld1q_u8(a + i));
    const uint8x16_t nb = vtstq_u8(vld1q_u8(b + i), vld1q_u8(b + i));
    // Lanes are 0xFF or 0x00; shift to 0/1 and sum.
    c.intersection += vaddvq_u8(vshrq_n_u8(vandq_u8(na, nb), 7));
    c.union_ += vaddvq_u8(vshrq_n_u8(vorrq_u8(na, nb), 7));
  }
  for (; i < n; ++i) {
    const bool x = a[i] != 0;
    const bool y = b[i] != 0;
    c.intersection += (x && y) ? 1 : 0;
    c.union_ += (x || y) ? 1 : 0;
  }
  return c;
}

}  // namespace

namespace internal {
const KernelTable kNeonTable{"neon", &DotF32, &DotF64, &OverlapU8};
}  // namespace internal

}  // namespace dpad::simd
