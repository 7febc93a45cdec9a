// Copyright 2026 The BPAM Authors
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

#pragma once

#include <algorithm>
#include <vector>

namespace bpam {

// Process-wide worker count used by every parallel kernel. Values <= 0 select
// the hardware concurrency.
void set_num_threads(int n);
int num_threads();

struct RowRange {
  int begin = 0;
  int end = 0;
};

// Number of fixed reduction chunks. Gradient reductions accumulate one buffer
// per chunk and merge them in chunk order, so results do not depend on the
// thread count.
inline constexpr int kReductionChunks = 8;

std::vector<RowRange> split_rows(int rows, int chunks = kReductionChunks);

template <class Fn>
void parallel_for(int begin, int end, Fn&& fn) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(num_threads())
#endif
  for (int i = begin; i < end; ++i) fn(i);
}

// fn(chunk_index, range) for every chunk of split_rows(rows).
template <class Fn>
void parallel_chunks(const std::vector<RowRange>& chunks, Fn&& fn) {
  const int n = static_cast<int>(chunks.size());
  parallel_for(0, n, [&](int i) { fn(i, chunks[static_cast<size_t>(i)]); });
}

}  // namespace bpam
