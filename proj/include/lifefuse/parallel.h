/*
 * Copyright 2026 The lifefuse Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LIFEFUSE_PARALLEL_H_
#define LIFEFUSE_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace lifefuse {

// Process-wide worker count used by the task-parallel stages (fold training,
// model comparison, Shapley sampling, tuning). Defaults to 1.
void SetNumThreads(int threads);
int NumThreads();

// Runs body(i) for i in [0, n). Each index must write only to its own output
// slot. Nested calls from inside a worker run serially. The first exception
// thrown (lowest index) is rethrown after all workers join.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lifefuse

#endif  // LIFEFUSE_PARALLEL_H_
