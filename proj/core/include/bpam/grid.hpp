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

#include <span>
#include <string>
#include <vector>

#include "bpam/image.hpp"
#include "bpam/layout.hpp"

namespace bpam {

// Spatial and intensity mapping between an image and its grid.
struct GridGeometry {
  int grid_h = 1;
  int grid_w = 1;
  int depth = 8;
  int image_h = 1;
  int image_w = 1;
  // Pixel-center alignment; off reproduces the literal u = x / s_x mapping.
  bool align_centers = true;
  // Code-value range of the literal intensity mapping (I / s_r).
  double intensity_range = 255.0;

  double stride_x() const { return static_cast<double>(image_w) / grid_w; }
  double stride_y() const { return static_cast<double>(image_h) / grid_h; }
  double stride_r() const { return intensity_range / depth; }

  // Throws ArgumentError when an invariant is violated.
  void validate() const;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

// Geometry whose grid is 1/ratio of the image in each spatial dimension
// (rounded up, at least one cell).
GridGeometry geometry_for_ratio(int image_h, int image_w, int ratio, int depth = 8, bool align_centers = true);

// grid_h x grid_w x depth cells of `params` values, stored [y][x][z][p].
template <class T>
class BilateralGridT {
 public:
  BilateralGridT() = default;
  BilateralGridT(const GridGeometry& geom, int params, T fill = T(0));

  const GridGeometry& geometry() const { return geom_; }
  int params() const { return params_; }
  int grid_h() const { return geom_.grid_h; }
  int grid_w() const { return geom_.grid_w; }
  int depth() const { return geom_.depth; }
  size_t size() const { return cells_.size(); }

  size_t index(int y, int x, int z, int p = 0) const {
    return ((static_cast<size_t>(y) * geom_.grid_w + x) * geom_.depth + z) * params_ + p;
  }
  T& at(int y, int x, int z, int p) { return cells_[index(y, x, z, p)]; }
  const T& at(int y, int x, int z, int p) const { return cells_[index(y, x, z, p)]; }
  T* cell(int y, int x, int z) { return cells_.data() + index(y, x, z); }
  const T* cell(int y, int x, int z) const { return cells_.data() + index(y, x, z); }

  std::span<T> values() { return cells_; }
  std::span<const T> values() const { return cells_; }

  // Copy with the same cells but image dims rebound (e.g. a grid applied to
  // an image of another resolution).
  BilateralGridT with_image_size(int image_h, int image_w) const;

  friend bool operator==(const BilateralGridT&, const BilateralGridT&) = default;

 private:
  GridGeometry geom_;
  int params_ = 0;
  std::vector<T> cells_;
};

using BilateralGrid = BilateralGridT<float>;

template <class To, class From>
BilateralGridT<To> grid_cast(const BilateralGridT<From>& g) {
  BilateralGridT<To> out(g.geometry(), g.params());
  auto d = out.values();
  auto s = g.values();
  for (size_t i = 0; i < s.size(); ++i) d[i] = static_cast<To>(s[i]);
  return out;
}

// Grid whose every cell holds identity_cell(kind).
template <class T>
BilateralGridT<T> identity_grid(const GridGeometry& geom, GridKind kind);

enum class SubgridRole { kWeight, kBias, kAffineRow };

// A grid split by slot category. Every subgrid shares the source geometry.
template <class T>
struct SubgridSet {
  GridKind kind = GridKind::kStage1;
  std::vector<BilateralGridT<T>> subgrids;
  std::vector<SubgridRole> roles;
};

// Splits a P=32 (stage 1), P=27 (stage 2) or P=12 (affine) grid into its
// subgrids; see subgrid_slots for the partition.
template <class T>
SubgridSet<T> decompose(const BilateralGridT<T>& grid, GridKind kind);

// Inverse of decompose.
template <class T>
BilateralGridT<T> recompose(const SubgridSet<T>& set);

// Reinterprets a grid_h x grid_w feature map with depth*params channels as a
// grid: cells[y][x][z][p] = feat[y][x][depth*p + z].
template <class T>
BilateralGridT<T> unroll_grid(const ImageT<T>& feat, int depth, int params, const GridGeometry& geom);

// Adjoint of unroll_grid (the inverse permutation).
template <class T>
ImageT<T> roll_grid(const BilateralGridT<T>& grid);

}  // namespace bpam
