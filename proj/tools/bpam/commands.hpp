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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bpam/pipeline.hpp"
#include "bpam/trainer.hpp"

namespace bpam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitMissingFile = 2;

// Settings shared by every command. Optional fields fall back to a
// per-command default.
struct RunConfig {
  std::string mode = "mlp";
  std::string decomposed = "on";
  int grid_ratio = 8;
  std::optional<int> depth;
  std::string align_centers = "on";
  std::string input, target, out, grids, weights;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<long> iters;
  double lr_max = 3e-4;
  double lr_min = 4e-6;
  std::optional<int> precision;

  PipelineConfig pipeline(int default_depth = 8) const;
};

struct InitOptions {
  int width = 0;
  int height = 0;
};

struct EnhanceOptions {
  int bit_depth = 8;
};

struct BenchOptions {
  std::vector<std::string> resolutions;
  int warmup = 5;
};

struct GradcheckCliOptions {
  int image_size = 8;
  int grid_size = 2;
  bool corrupt_backward = false;
};

struct TrainOptions {
  std::string train_mode = "direct";
};

struct RecoverOptions {
  int size = 64;
  double min_psnr = 40.0;
};

int cmd_init(const RunConfig& rc, const InitOptions& opt);
int cmd_enhance(const RunConfig& rc, const EnhanceOptions& opt);
int cmd_bench(const RunConfig& rc, const BenchOptions& opt);
int cmd_gradcheck(const RunConfig& rc, const GradcheckCliOptions& opt);
int cmd_train(const RunConfig& rc, const TrainOptions& opt);
int cmd_eval(const RunConfig& rc);
int cmd_recover(const RunConfig& rc, const RecoverOptions& opt);

}  // namespace bpam::cli
