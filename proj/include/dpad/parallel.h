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

#ifndef DPAD_PARALLEL_H_
#define DPAD_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace dpad {

// Worker count from DPAD_THREADS, else hardware concurrency; at least 1.
size_t ThreadBudget();

// Runs fn(i) for i in [0, n) over up to `threads` workers. Each index is
// visited exactly once; callers write results by index so output order never
// depends on scheduling. The first exception thrown by fn is rethrown after
// all workers join.
void ParallelFor(size_t n, size_t threads, const std::function<void(size_t)>& fn);

}  // namespace dpad

#endif  // DPAD_PARALLEL_H_
