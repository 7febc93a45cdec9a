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
#include <vector>

#include "bpam/losses.hpp"
#include "bpam/optim.hpp"
#include "bpam/pipeline.hpp"
#include "bpam/producer.hpp"

namespace bpam {

enum class TrainMode { kDirectGrids, kProducer };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& s);

struct TrainConfig {
  PipelineConfig pipeline;
  LossWeights loss;
  TrainMode mode = TrainMode::kDirectGrids;
  long iters = 2000;
  double lr_max = 3e-4;
  double lr_min = 4e-6;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

// Loss terms evaluated at `step`, before that step's update. The final
// record (step == iters) is the loss of the returned parameters.
struct LossRecord {
  long step = 0;
  double lr = 0.0;
  double mse = 0.0;
  double ssim = 0.0;
  double total = 0.0;
};

template <class T>
struct TrainResultT {
  ModelT<T> model;                          // grids are the produced ones in producer mode
  std::optional<ProducerNetT<T>> producer;  // producer mode only
  int downsample = 1;                       // producer input = downsample(image, downsample)
  std::vector<LossRecord> trace;

  double final_loss() const { return trace.empty() ? 0.0 : trace.back().total; }
};

using TrainResult = TrainResultT<float>;

// Batch-size-1 Adam on total_loss(enhance(input), target). `init`, when
// given, replaces the identity initialization of a direct-grids run.
// Throws TrainingError with the step index when the loss becomes non-finite.
template <class T>
TrainResultT<T> train_toy(const ImageT<T>& input, const ImageT<T>& target, const TrainConfig& config,
                          const ModelT<T>* init = nullptr);

// "step,lr,mse,ssim,total" with one row per record.
std::string loss_trace_csv(const std::vector<LossRecord>& trace);

// Smooth seeded test image with edges: low-frequency color fields plus a few
// hard-edged discs.
Image synthetic_image(int height, int width, std::uint64_t seed);

// Self-consistency experiment: a random ground-truth model renders a target
// from a synthetic input, and direct-grid training from identity grids tries
// to reproduce it.
struct RecoveryConfig {
  int size = 64;
  TrainConfig train;
  double truth_grid_noise = 0.1;
  double truth_net_scale = 1.0;
};

struct RecoveryResult {
  double psnr = 0.0;  // PSNR(trained output, target)
  double initial_psnr = 0.0;
  TrainResult result;
};

RecoveryResult run_recovery(const RecoveryConfig& config);

}  // namespace bpam
