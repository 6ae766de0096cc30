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

#include <cassert>
#include <cstdlib>
#include <string_view>

#include "kernels_internal.h"

namespace dpad::simd {

const KernelTable* Avx2Kernels() {
#if defined(__x86_64__) || defined(_M_X64)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &internal::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* NeonKernels() {
#if defined(__aarch64__)
  return &internal::kNeonTable;
#else
  return nullptr;
#endif
}

const KernelTable& ActiveKernels() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* forced = std::getenv("DPAD_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return ScalarKernels();
    if (const KernelTable* t = Avx2Kernels()) return *t;
    if (const KernelTable* t = NeonKernels()) return *t;
    return ScalarKernels();
  }();
  return table;
}

double Dot(std::span<const float> a, std::span<const float> b) {
  assert(a.size() == b.size());
  return ActiveKernels().dot_f32(a.data(), b.data(), a.size());
}

double Dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return ActiveKernels().dot_f64(a.data(), b.data(), a.size());
}

OverlapCounts Overlap(std::span<const uint8_t> a, std::span<const uint8_t> b) {
  assert(a.size() == b.size());
  return ActiveKernels().overlap_u8(a.data(), b.data(), a.size());
}

}  // namespace dpad::simd
