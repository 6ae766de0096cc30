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

#include "dpad/simd/kernels.h"

namespace dpad::simd {
namespace {

template <typename T>
double DotReference(const T* a, const T* b, size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (size_t k = 0; k < 4; ++k) {
      const double p = static_cast<double>(a[i + k]) * static_cast<double>(b[i + k]);
      lane[k] = lane[k] + p;
    }
  }
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) {
    sum = sum + static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

double DotF32(const float* a, const float* b, size_t n) { return DotReference(a, b, n); }
double DotF64(const double* a, const double* b, size_t n) { return DotReference(a, b, n); }

OverlapCounts OverlapU8(const uint8_t* a, const uint8_t* b, size_t n) {
  OverlapCounts c;
  for (size_t i = 0; i < n; ++i) {
    const bool x = a[i] != 0;
    const bool y = b[i] != 0;
    c.intersection += (x && y) ? 1 : 0;
    c.union_ += (x || y) ? 1 : 0;
  }
  return c;
}

constexpr KernelTable kScalarTable{"scalar", &DotF32, &DotF64, &OverlapU8};

}  // namespace

const KernelTable& ScalarKernels() { return kScalarTable; }

}  // namespace dpad::simd
