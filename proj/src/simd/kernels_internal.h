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

#ifndef DPAD_SRC_SIMD_KERNELS_INTERNAL_H_
#define DPAD_SRC_SIMD_KERNELS_INTERNAL_H_

#include "dpad/simd/kernels.h"

namespace dpad::simd::internal {

// Defined in the per-ISA translation units. They are only referenced when
// the matching source is part of the build.
extern const KernelTable kAvx2Table;
extern const KernelTable kNeonTable;

}  // namespace dpad::simd::internal

#endif  // DPAD_SRC_SIMD_KERNELS_INTERNAL_H_
