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
#include <vector>

#include "bpam/grid.hpp"
#include "bpam/guidance.hpp"
#include "bpam/mlp.hpp"
#include "bpam/params.hpp"
#include "bpam/slicing.hpp"

namespace bpam {

enum class TransformMode { kAffine, kMlp };

// Selects one of the four ablation settings (affine/MLP x monolithic/
// decomposed) plus the geometry knobs shared by every entry point.
struct PipelineConfig {
  TransformMode mode = TransformMode::kMlp;
  bool decomposed = true;
  int grid_ratio = 8;
  int depth = 8;
  bool align_centers = true;
  int guidance_hidden = GuidanceNet::kDefaultHidden;
  // Clamp the output to [0, 1]; gradients pass straight through the clamp.
  bool clamp_output = true;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

std::vector<GridKind> grid_kinds(const PipelineConfig& cfg);
SlotRouting routing_for(const PipelineConfig& cfg, GridKind kind);
// Guidance channels consumed by grid `stage` (0 or 1).
int guidance_channels(const PipelineConfig& cfg, int stage);
int guidance_inputs(int stage);

std::string to_string(TransformMode mode);
TransformMode parse_mode(const std::string& s);

// Everything the per-pixel transform needs: grids plus guidance nets.
// Affine models carry one grid and leave gnet2 empty.
template <class T>
struct ModelT {
  PipelineConfig config;
  std::vector<BilateralGridT<T>> grids;
  GuidanceNetT<T> gnet1;
  GuidanceNetT<T> gnet2;

  // Identity grids for `geom` and freshly initialized guidance nets.
  static ModelT identity(const PipelineConfig& cfg, const GridGeometry& geom, std::uint64_t seed);

  // Identity grids plus uniform noise in [-grid_noise, grid_noise] per cell,
  // and guidance nets with all parameters drawn at `net_scale`. Used for
  // gradient checks, synthetic recovery targets and benchmarks.
  static ModelT random(const PipelineConfig& cfg, const GridGeometry& geom, std::uint64_t seed,
                       double grid_noise = 0.1, double net_scale = 1.0);

  ModelT zeros_like() const;
  ParamList<T> parameters();
  ParamList<T> guidance_parameters();
  void validate() const;

  friend bool operator==(const ModelT&, const ModelT&) = default;
};

using Model = ModelT<float>;
using ModelD = ModelT<double>;

template <class To, class From>
ModelT<To> model_cast(const ModelT<From>& m) {
  ModelT<To> o;
  o.config = m.config;
  for (const auto& g : m.grids) o.grids.push_back(grid_cast<To>(g));
  o.gnet1 = net_cast<To>(m.gnet1);
  o.gnet2 = net_cast<To>(m.gnet2);
  return o;
}

// Intermediate maps kept by the training forward pass.
template <class T>
struct ForwardCache {
  ImageT<T> input;
  ImageT<T> guide1;   // H x W x K1
  ImageT<T> sliced1;  // H x W x P1
  ImageT<T> pre1;     // H x W x 8, MLP only
  ImageT<T> hidden;   // H x W x 8, MLP only
  ImageT<T> guide2;   // H x W x K2, MLP only
  ImageT<T> sliced2;  // H x W x 27, MLP only
  ImageT<T> raw;      // unclamped output
  ImageT<T> output;   // clamped when config.clamp_output
};

template <class T>
ForwardCache<T> pipeline_forward(const ModelT<T>& model, const ImageT<T>& img);

// Gradients w.r.t. every model parameter, shaped like the model.
template <class T>
ModelT<T> pipeline_backward(const ModelT<T>& model, const ForwardCache<T>& cache, const ImageT<T>& upstream);

// Wall-clock milliseconds per stage of one enhance call.
struct StageTimings {
  double guidance_ms = 0.0;
  double slice1_ms = 0.0;
  double mlp1_ms = 0.0;
  double slice2_ms = 0.0;
  double mlp2_ms = 0.0;
  double total_ms = 0.0;
};

// Inference path: grids repacked by subgrid so each slicing group is a
// contiguous vector, rows processed in bands. Output equals
// pipeline_forward(...).output up to float rounding.
class Enhancer {
 public:
  explicit Enhancer(const Model& model);

  Image run(const Image& img, StageTimings* timings = nullptr) const;
  const Model& model() const { return model_; }

  struct PackedGrid {
    GridGeometry geom;
    int groups = 0;
    int lanes = 0;               // padded group width
    std::vector<int> channel;    // guidance channel per group
    std::vector<float> cells;    // [gy][gx][z][group][lane]
  };

  struct PackedNet {
    int in = 0, hidden = 0, out = 0;
    std::vector<float> w1t;  // in x hidden
    std::vector<float> b1;
    std::vector<float> w2;   // out x hidden
    std::vector<float> b2;
  };

 private:
  Model model_;
  std::vector<PackedGrid> packed_;
  PackedNet net1_;
  PackedNet net2_;
};

Image enhance(const Image& img, const Model& model, StageTimings* timings = nullptr);

}  // namespace bpam
