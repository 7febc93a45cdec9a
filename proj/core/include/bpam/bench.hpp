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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bpam/pipeline.hpp"

namespace bpam {

struct BenchConfig {
  // (width, height) pairs.
  std::vector<std::pair<int, int>> resolutions = {{1920, 1080}, {3840, 2160}};
  int warmup = 5;
  int iterations = 100;
  std::uint64_t seed = 0;
  PipelineConfig pipeline;
};

// One row per resolution and stage. Stages: guidance, slice1, mlp1, slice2,
// mlp2, total. Grid production is excluded; the model is synthetic.
struct BenchRow {
  int width = 0;
  int height = 0;
  std::string stage;
  int iterations = 0;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double fps = 0.0;  // 1000 / mean_ms
};

std::vector<BenchRow> run_bench(const BenchConfig& config);

// "width,height,stage,iterations,mean_ms,min_ms,fps"
std::string bench_csv(const std::vector<BenchRow>& rows);

// Human-readable table in the layout of a per-stage runtime report.
std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace bpam
