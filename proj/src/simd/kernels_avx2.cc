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

// Compiled with -mavx2 only. Must not be called unless cpuid reports AVX2.

#include <immintrin.h>

#include "kernels_internal.h"

namespace dpad::simd {
namespace {

double ReduceLanes(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double DotF32(const float* a, const float* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // float * float is exact in double, so widening first matches the
    // reference's per-element products.
    const __m256d va = _mm256_cvtps_pd(_mm_loadu_ps(a + i));
    const __m256d vb = _mm256_cvtps_pd(_mm_loadu_ps(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double sum = ReduceLanes(acc);
  for (; i < n; ++i) {
    sum = sum + static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

double DotF64(const double* a, const double* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double sum = ReduceLanes(acc);
  for (; i < n; ++i) {
    sum = sum + a[i] * b[i];
  }
  return sum;
}

OverlapCounts OverlapU8(const uint8_t* a, const uint8_t* b, size_t n) {
  OverlapCounts c;
  const __m256i zero = _mm256_setzero_si256();
  size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    // Bit set where the byte is zero.
    const uint32_t za = static_cast<uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(va, zero)));
    const uint32_t zb = static_cast<uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(vb, zero)));
    c.intersection += static_cast<uint64_t>(__builtin_popcount(~za & ~zb));
    c.union_ += static_cast<uint64_t>(__builtin_popcount(~(za & zb)));
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
const KernelTable kAvx2Table{"avx2", &DotF32, &DotF64, &OverlapU8};
}  // namespace internal

}  // namespace dpad::simd
