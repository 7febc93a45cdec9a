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

#include "bpam/grid.hpp"

#include <cmath>
#include <string>

namespace bpam {

void GridGeometry::validate() const {
  if (grid_h < 1 || grid_w < 1 || depth < 1)
    throw ArgumentError("grid dims must be >= 1 (got " + std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                        "x" + std::to_string(depth) + ")");
  if (image_h < grid_h || image_w < grid_w)
    throw ArgumentError("image " + std::to_string(image_h) + "x" + std::to_string(image_w) +
                        " is smaller than grid " + std::to_string(grid_h) + "x" + std::to_string(grid_w));
  if (!(intensity_range > 0.0) || !std::isfinite(intensity_range))
    throw ArgumentError("intensity range must be positive");
}

GridGeometry geometry_for_ratio(int image_h, int image_w, int ratio, int depth, bool align_centers) {
  if (ratio < 1) throw ArgumentError("grid ratio must be >= 1");
  GridGeometry g;
  g.image_h = image_h;
  g.image_w = image_w;
  g.grid_h = std::max(1, (image_h + ratio - 1) / ratio);
  g.grid_w = std::max(1, (image_w + ratio - 1) / ratio);
  g.depth = depth;
  g.align_centers = align_centers;
  g.validate();
  return g;
}

template <class T>
BilateralGridT<T>::BilateralGridT(const GridGeometry& geom, int params, T fill) : geom_(geom), params_(params) {
  geom.validate();
  if (params < 1) throw ArgumentError("params per cell must be >= 1");
  cells_.assign(static_cast<size_t>(geom.grid_h) * geom.grid_w * geom.depth * params, fill);
}

template <class T>
BilateralGridT<T> BilateralGridT<T>::with_image_size(int image_h, int image_w) const {
  BilateralGridT out = *this;
  out.geom_.image_h = image_h;
  out.geom_.image_w = image_w;
  out.geom_.validate();
  return out;
}

template <class T>
BilateralGridT<T> identity_grid(const GridGeometry& geom, GridKind kind) {
  const auto cell = identity_cell(kind);
  BilateralGridT<T> g(geom, static_cast<int>(cell.size()));
  auto v = g.values();
  for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<T>(cell[i % cell.size()]);
  return g;
}

template <class T>
SubgridSet<T> decompose(const BilateralGridT<T>& grid, GridKind kind) {
  if (grid.params() != params_per_cell(kind))
    throw ArgumentError("decompose: grid has " + std::to_string(grid.params()) + " params per cell, expected " +
                        std::to_string(params_per_cell(kind)));
  const auto& parts = subgrid_slots(kind);
  SubgridSet<T> set;
  set.kind = kind;
  const size_t cells = grid.size() / static_cast<size_t>(grid.params());
  for (size_t k = 0; k < parts.size(); ++k) {
    const auto& slots = parts[k];
    BilateralGridT<T> sub(grid.geometry(), static_cast<int>(slots.size()));
    auto dst = sub.values();
    auto src = grid.values();
    for (size_t c = 0; c < cells; ++c)
      for (size_t j = 0; j < slots.size(); ++j)
        dst[c * slots.size() + j] = src[c * static_cast<size_t>(grid.params()) + static_cast<size_t>(slots[j])];
    set.subgrids.push_back(std::move(sub));
    if (kind == GridKind::kAffine)
      set.roles.push_back(SubgridRole::kAffineRow);
    else
      set.roles.push_back(k + 1 == parts.size() ? SubgridRole::kBias : SubgridRole::kWeight);
  }
  return set;
}

template <class T>
BilateralGridT<T> recompose(const SubgridSet<T>& set) {
  const auto& parts = subgrid_slots(set.kind);
  if (set.subgrids.size() != parts.size())
    throw ArgumentError("recompose: expected " + std::to_string(parts.size()) + " subgrids, got " +
                        std::to_string(set.subgrids.size()));
  const GridGeometry& geom = set.subgrids.front().geometry();
  const int params = params_per_cell(set.kind);
  BilateralGridT<T> grid(geom, params);
  const size_t cells = grid.size() / static_cast<size_t>(params);
  for (size_t k = 0; k < parts.size(); ++k) {
    const auto& sub = set.subgrids[k];
    const auto& slots = parts[k];
    if (!(sub.geometry() == geom) || sub.params() != static_cast<int>(slots.size()))
      throw ArgumentError("recompose: subgrid " + std::to_string(k) + " does not match the set");
    auto src = sub.values();
    auto dst = grid.values();
    for (size_t c = 0; c < cells; ++c)
      for (size_t j = 0; j < slots.size(); ++j)
        dst[c * static_cast<size_t>(params) + static_cast<size_t>(slots[j])] = src[c * slots.size() + j];
  }
  return grid;
}

template <class T>
BilateralGridT<T> unroll_grid(const ImageT<T>& feat, int depth, int params, const GridGeometry& geom) {
  if (depth != geom.depth) throw ArgumentError("unroll_grid: depth does not match geometry");
  if (feat.channels() != depth * params)
    throw ArgumentError("unroll_grid: feature map has " + std::to_string(feat.channels()) + " channels, expected " +
                        std::to_string(depth * params));
  if (feat.height() != geom.grid_h || feat.width() != geom.grid_w)
    throw ArgumentError("unroll_grid: feature map is " + std::to_string(feat.height()) + "x" +
                        std::to_string(feat.width()) + ", grid is " + std::to_string(geom.grid_h) + "x" +
                        std::to_string(geom.grid_w));
  BilateralGridT<T> grid(geom, params);
  for (int y = 0; y < geom.grid_h; ++y)
    for (int x = 0; x < geom.grid_w; ++x) {
      const T* src = feat.pixel(y, x);
      for (int z = 0; z < depth; ++z) {
        T* dst = grid.cell(y, x, z);
        for (int p = 0; p < params; ++p) dst[p] = src[depth * p + z];
      }
    }
  return grid;
}

template <class T>
ImageT<T> roll_grid(const BilateralGridT<T>& grid) {
  const int depth = grid.depth();
  const int params = grid.params();
  ImageT<T> feat(grid.grid_h(), grid.grid_w(), depth * params);
  for (int y = 0; y < grid.grid_h(); ++y)
    for (int x = 0; x < grid.grid_w(); ++x) {
      T* dst = feat.pixel(y, x);
      for (int z = 0; z < depth; ++z) {
        const T* src = grid.cell(y, x, z);
        for (int p = 0; p < params; ++p) dst[depth * p + z] = src[p];
      }
    }
  return feat;
}

#define BPAM_INSTANTIATE(T)                                                                   \
  template class BilateralGridT<T>;                                                           \
  template BilateralGridT<T> identity_grid<T>(const GridGeometry&, GridKind);                 \
  template SubgridSet<T> decompose<T>(const BilateralGridT<T>&, GridKind);                     \
  template BilateralGridT<T> recompose<T>(const SubgridSet<T>&);                               \
  template BilateralGridT<T> unroll_grid<T>(const ImageT<T>&, int, int, const GridGeometry&); \
  template ImageT<T> roll_grid<T>(const BilateralGridT<T>&);

BPAM_INSTANTIATE(float)
BPAM_INSTANTIATE(double)
#undef BPAM_INSTANTIATE

}  // namespace bpam
