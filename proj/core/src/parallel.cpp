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

#include "bpam/parallel.hpp"

#include <atomic>
#include <thread>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace bpam {
namespace {

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::atomic<int> g_threads{0};

}  // namespace

void set_num_threads(int n) { g_threads.store(n <= 0 ? 0 : n); }

int num_threads() {
  const int n = g_threads.load();
  return n > 0 ? n : hardware_threads();
}

std::vector<RowRange> split_rows(int rows, int chunks) {
  std::vector<RowRange> out;
  if (rows <= 0) return out;
  chunks = std::clamp(chunks, 1, rows);
  out.reserve(static_cast<size_t>(chunks));
  for (int i = 0; i < chunks; ++i) {
    const int b = static_cast<int>(static_cast<long>(rows) * i / chunks);
    const int e = static_cast<int>(static_cast<long>(rows) * (i + 1) / chunks);
    out.push_back({b, e});
  }
  return out;
}

}  // namespace bpam
