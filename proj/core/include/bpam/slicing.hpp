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
#include <array>
#include <cmath>

#include "bpam/grid.hpp"

namespace bpam {

// Continuous grid coordinates of a pixel.
struct GridCoord {
  double u = 0.0;
  double v = 0.0;
  double r = 0.0;
  bool guidance_clamped = false;  // g was outside [0, 1]
};

// Spatial lift of one axis: pixel index -> continuous cell coordinate.
inline double lift_axis(double pos, int image_extent, int grid_extent, bool align_centers) {
  const double scale = static_cast<double>(grid_extent) / image_extent;
  return align_centers ? (pos + 0.5) * scale - 0.5 : pos * scale;
}

// Intensity lift: guidance in [0, 1] -> [0, depth - 1].
inline double lift_intensity(double g, int depth) { return g * (depth - 1); }

GridCoord lift(double x, double y, double g, const GridGeometry& geom);

template <class T>
struct FracSplit {
  int index = 0;
  T frac = T(0);
};

// Integer/fraction split of a continuous coordinate over `dim` cells.
// Coordinates below 0 map to (0, 0); coordinates at or beyond dim - 1 map to
// (dim - 1, 0). The upper neighbour is min(index + 1, dim - 1).
template <class T>
inline FracSplit<T> split_frac(double c, int dim) {
  if (!(c > 0.0)) return {0, T(0)};
  if (c >= dim - 1) return {dim - 1, T(0)};
  const double f = std::floor(c);
  return {static_cast<int>(f), static_cast<T>(c - f)};
}

// The eight trilinear weights, indexed (a << 2) | (b << 1) | c for the
// (u, v, r) offsets a, b, c.
std::array<double, 8> trilinear_weights(double du, double dv, double dr);

// Slices a grid with a single-channel guidance map (every slot reads channel
// 0). Output is H x W x P.
template <class T>
ImageT<T> slice(const BilateralGridT<T>& grid, const ImageT<T>& guidance);

// Slices with a multi-channel guidance map; slot p reads guidance channel
// routing.slot_channel[p].
template <class T>
ImageT<T> slice(const BilateralGridT<T>& grid, const ImageT<T>& guidance, const SlotRouting& routing);

template <class T>
struct SliceGradients {
  BilateralGridT<T> grid;
  ImageT<T> guidance;
};

// Vector-Jacobian product of slice. Grid gradients are accumulated in double
// precision over fixed row chunks, so the result does not depend on the
// number of threads.
template <class T>
SliceGradients<T> slice_backward(const BilateralGridT<T>& grid, const ImageT<T>& guidance,
                                 const ImageT<T>& upstream, const SlotRouting& routing);

template <class T>
SliceGradients<T> slice_backward(const BilateralGridT<T>& grid, const ImageT<T>& guidance,
                                 const ImageT<T>& upstream) {
  return slice_backward(grid, guidance, upstream, SlotRouting::monolithic(grid.params()));
}

// Slices each subgrid k with guidance channel k and scatters the results
// back into the slot order of the recomposed grid.
template <class T>
ImageT<T> slice_decomposed(const SubgridSet<T>& set, const ImageT<T>& guidance);

}  // namespace bpam
