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
#include "bpam/params.hpp"

namespace bpam {

struct ConvSpec {
  int out_channels = 16;
  int stride = 2;

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

// Shape of the grid producer: a stack of 3x3 zero-padded convolutions with
// ReLU, a pixel unshuffle, and one 1x1 head per grid emitting depth * P
// channels that are unrolled into a grid.
struct ProducerConfig {
  int in_channels = 3;
  std::vector<ConvSpec> convs = {{16, 2}, {16, 2}};
  int unshuffle = 4;
  int depth = 8;
  std::vector<GridKind> heads = {GridKind::kStage1, GridKind::kStage2};

  // Total spatial reduction from the producer input to the grid.
  int reduction() const;

  friend bool operator==(const ProducerConfig&, const ProducerConfig&) = default;
};

template <class T>
struct ConvLayerT {
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
  std::vector<T> weight;  // out x in x 3 x 3
  std::vector<T> bias;    // out

  friend bool operator==(const ConvLayerT&, const ConvLayerT&) = default;
};

template <class T>
struct GridHeadT {
  GridKind kind = GridKind::kStage1;
  int in_channels = 0;
  int out_channels = 0;  // depth * P
  std::vector<T> weight;  // out x in
  std::vector<T> bias;    // out

  friend bool operator==(const GridHeadT&, const GridHeadT&) = default;
};

template <class T>
struct ProducerNetT {
  ProducerConfig config;
  std::vector<ConvLayerT<T>> convs;
  std::vector<GridHeadT<T>> heads;

  // He-initialized convolutions; heads with zero weights and biases set to
  // the identity-cell encoding, so the produced grids start as identity
  // grids regardless of the convolution weights.
  static ProducerNetT create(const ProducerConfig& config, std::uint64_t seed);
  ProducerNetT zeros_like() const;

  ParamList<T> parameters(const std::string& prefix = "producer");

  friend bool operator==(const ProducerNetT&, const ProducerNetT&) = default;
};

using ProducerNet = ProducerNetT<float>;
using ProducerNetD = ProducerNetT<double>;

template <class To, class From>
ProducerNetT<To> producer_cast(const ProducerNetT<From>& n) {
  ProducerNetT<To> o;
  o.config = n.config;
  for (const auto& c : n.convs)
    o.convs.push_back({c.in_channels, c.out_channels, c.stride, {c.weight.begin(), c.weight.end()},
                       {c.bias.begin(), c.bias.end()}});
  for (const auto& h : n.heads)
    o.heads.push_back({h.kind, h.in_channels, h.out_channels, {h.weight.begin(), h.weight.end()},
                       {h.bias.begin(), h.bias.end()}});
  return o;
}

// Spatial size the producer maps a (height, width) input to, or throws
// ArgumentError when the unshuffle factor does not divide the feature map.
std::pair<int, int> producer_grid_dims(const ProducerConfig& config, int height, int width);

// Runs the producer on a low-resolution image. `geom` must describe grids of
// exactly the produced spatial size; mismatches raise ArgumentError naming
// the expected and actual dims.
template <class T>
std::vector<BilateralGridT<T>> produce_grids(const ProducerNetT<T>& net, const ImageT<T>& lowres,
                                             const GridGeometry& geom);

// Input followed by the post-ReLU output of every convolution layer.
template <class T>
std::vector<ImageT<T>> conv_stack(const ProducerNetT<T>& net, const ImageT<T>& lowres);

// Gradient of the producer parameters given gradients w.r.t. every produced
// grid. Recomputes the forward activations from `lowres`.
template <class T>
ProducerNetT<T> producer_backward(const ProducerNetT<T>& net, const ImageT<T>& lowres, const GridGeometry& geom,
                                  const std::vector<BilateralGridT<T>>& upstream);

// Producer configuration and pre-downsampling factor that yield grids at
// 1/ratio (4, 8 or 32) of the full image.
struct ProducerPlan {
  int downsample = 1;
  ProducerConfig config;
};
ProducerPlan producer_plan_for_ratio(int ratio, int depth = 8, int width = 16);

// Serialization helpers for the "producer.*" entries of a tensor container.
struct TensorEntry;
template <class T>
void append_producer(std::vector<TensorEntry>& out, ProducerNetT<T>& net);
ProducerNet load_producer(const std::vector<TensorEntry>& entries);
bool has_producer(const std::vector<TensorEntry>& entries);

}  // namespace bpam
