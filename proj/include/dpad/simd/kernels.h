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

// Data-parallel inner loops with a scalar reference and per-ISA variants.
//
// Every variant reproduces the scalar reference bit for bit. The scalar code
// accumulates in four interleaved double lanes (element i goes to lane i % 4),
// and reduces as (lane0 + lane1) + (lane2 + lane3) followed by the tail in
// index order. The vector variants use the same lane layout and reduction
// order, so switching ISA never changes a reward or a golden file.

#ifndef DPAD_SIMD_KERNELS_H_
#define DPAD_SIMD_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace dpad::simd {

struct OverlapCounts {
  uint64_t intersection = 0;
  uint64_t union_ = 0;

  friend bool operator==(const OverlapCounts&, const OverlapCounts&) = default;
};

// Function table for one instruction set. Bitmaps hold one byte per pixel,
// 0 for background and nonzero for foreground.
struct KernelTable {
  std::string_view name;
  double (*dot_f32)(const float* a, const float* b, size_t n);
  double (*dot_f64)(const double* a, const double* b, size_t n);
  OverlapCounts (*overlap_u8)(const uint8_t* a, const uint8_t* b, size_t n);
};

const KernelTable& ScalarKernels();

// Returns nullptr when the variant was not compiled in or the running CPU
// lacks the instructions.
const KernelTable* Avx2Kernels();
const KernelTable* NeonKernels();

// Best table for this CPU. DPAD_SIMD=scalar in the environment forces the
// reference path. Resolved once per process.
const KernelTable& ActiveKernels();

double Dot(std::span<const float> a, std::span<const float> b);
double Dot(std::span<const double> a, std::span<const double> b);
OverlapCounts Overlap(std::span<const uint8_t> a, std::span<const uint8_t> b);

}  // namespace dpad::simd

#endif  // DPAD_SIMD_KERNELS_H_
