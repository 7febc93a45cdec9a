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

#include "bpam/slicing.hpp"

#include <string>
#include <vector>

#include "bpam/parallel.hpp"

namespace bpam {

GridCoord lift(double x, double y, double g, const GridGeometry& geom) {
  GridCoord c;
  if (!(g >= 0.0 && g <= 1.0)) {
    c.guidance_clamped = true;
    g = std::isnan(g) ? 0.0 : std::clamp(g, 0.0, 1.0);
  }
  c.u = lift_axis(x, geom.image_w, geom.grid_w, geom.align_centers);
  c.v = lift_axis(y, geom.image_h, geom.grid_h, geom.align_centers);
  c.r = lift_intensity(g, geom.depth);
  return c;
}

std::array<double, 8> trilinear_weights(double du, double dv, double dr) {
  std::array<double, 8> w{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        w[static_cast<size_t>((a << 2) | (b << 1) | c)] =
            (a ? du : 1.0 - du) * (b ? dv : 1.0 - dv) * (c ? dr : 1.0 - dr);
  return w;
}

namespace {

template <class T>
struct AxisSplit {
  int lo = 0;
  int hi = 0;
  T frac = T(0);
};

template <class T>
AxisSplit<T> axis_split(double c, int dim) {
  const auto s = split_frac<T>(c, dim);
  return {s.index, std::min(s.index + 1, dim - 1), s.frac};
}

template <class T>
std::vector<AxisSplit<T>> column_splits(const GridGeometry& geom) {
  std::vector<AxisSplit<T>> cols(static_cast<size_t>(geom.image_w));
  for (int x = 0; x < geom.image_w; ++x)
    cols[static_cast<size_t>(x)] = axis_split<T>(lift_axis(x, geom.image_w, geom.grid_w, geom.align_centers), geom.grid_w);
  return cols;
}

template <class T>
AxisSplit<T> row_split(const GridGeometry& geom, int y) {
  return axis_split<T>(lift_axis(y, geom.image_h, geom.grid_h, geom.align_centers), geom.grid_h);
}

template <class T>
AxisSplit<T> depth_split(T g, int depth) {
  return axis_split<T>(lift_intensity(std::clamp(static_cast<double>(g), 0.0, 1.0), depth), depth);
}

template <class T>
inline T lerp(T a, T b, T t) {
  return a + t * (b - a);
}

void check_guidance(const GridGeometry& geom, int gh, int gw, int gc, int channels, const char* op) {
  if (gh != geom.image_h || gw != geom.image_w)
    throw ArgumentError(std::string(op) + ": guidance is " + std::to_string(gh) + "x" + std::to_string(gw) +
                        ", grid geometry expects " + std::to_string(geom.image_h) + "x" +
                        std::to_string(geom.image_w));
  if (gc != channels)
    throw ArgumentError(std::string(op) + ": guidance has " + std::to_string(gc) + " channels, routing expects " +
                        std::to_string(channels));
}

void check_routing(const SlotRouting& routing, int params) {
  if (static_cast<int>(routing.slot_channel.size()) != params)
    throw ArgumentError("slot routing covers " + std::to_string(routing.slot_channel.size()) + " slots, grid has " +
                        std::to_string(params));
  for (int c : routing.slot_channel)
    if (c < 0 || c >= routing.channels) throw ArgumentError("slot routing references an invalid channel");
}

}  // namespace

template <class T>
ImageT<T> slice(const BilateralGridT<T>& grid, const ImageT<T>& guidance) {
  return slice(grid, guidance, SlotRouting::monolithic(grid.params()));
}

template <class T>
ImageT<T> slice(const BilateralGridT<T>& grid, const ImageT<T>& guidance, const SlotRouting& routing) {
  const GridGeometry& geom = grid.geometry();
  const int P = grid.params();
  const int D = geom.depth;
  const int K = routing.channels;
  check_routing(routing, P);
  check_guidance(geom, guidance.height(), guidance.width(), guidance.channels(), K, "slice");

  ImageT<T> out(geom.image_h, geom.image_w, P);
  const auto cols = column_splits<T>(geom);
  const size_t row_stride = static_cast<size_t>(D) * P;

  parallel_for(0, geom.image_h, [&](int y) {
    // Cells of the two bracketing grid rows, lerped along v once per image row.
    const auto rs = row_split<T>(geom, y);
    std::vector<T> rowcells(static_cast<size_t>(geom.grid_w) * row_stride);
    for (int gx = 0; gx < geom.grid_w; ++gx) {
      const T* a = grid.cell(rs.lo, gx, 0);
      const T* b = grid.cell(rs.hi, gx, 0);
      T* d = rowcells.data() + gx * row_stride;
      for (size_t i = 0; i < row_stride; ++i) d[i] = lerp(a[i], b[i], rs.frac);
    }
    std::vector<AxisSplit<T>> ds(static_cast<size_t>(K));
    for (int x = 0; x < geom.image_w; ++x) {
      const auto& cs = cols[static_cast<size_t>(x)];
      const T* g = guidance.pixel(y, x);
      for (int k = 0; k < K; ++k) ds[static_cast<size_t>(k)] = depth_split<T>(g[k], D);
      const T* lo = rowcells.data() + cs.lo * row_stride;
      const T* hi = rowcells.data() + cs.hi * row_stride;
      T* o = out.pixel(y, x);
      for (int p = 0; p < P; ++p) {
        const auto& d = ds[static_cast<size_t>(routing.slot_channel[static_cast<size_t>(p)])];
        const size_t z0 = static_cast<size_t>(d.lo) * P + p;
        const size_t z1 = static_cast<size_t>(d.hi) * P + p;
        o[p] = lerp(lerp(lo[z0], lo[z1], d.frac), lerp(hi[z0], hi[z1], d.frac), cs.frac);
      }
    }
  });
  return out;
}

template <class T>
SliceGradients<T> slice_backward(const BilateralGridT<T>& grid, const ImageT<T>& guidance,
                                 const ImageT<T>& upstream, const SlotRouting& routing) {
  const GridGeometry& geom = grid.geometry();
  const int P = grid.params();
  const int D = geom.depth;
  const int K = routing.channels;
  check_routing(routing, P);
  check_guidance(geom, guidance.height(), guidance.width(), guidance.channels(), K, "slice_backward");
  if (upstream.height() != geom.image_h || upstream.width() != geom.image_w || upstream.channels() != P)
    throw ArgumentError("slice_backward: upstream gradient shape does not match the sliced parameters");

  SliceGradients<T> grads{BilateralGridT<T>(geom, P), ImageT<T>(geom.image_h, geom.image_w, K)};
  const auto cols = column_splits<T>(geom);
  const auto chunks = split_rows(geom.image_h);
  std::vector<std::vector<double>> acc(chunks.size());

  parallel_chunks(chunks, [&](int ci, RowRange range) {
    auto& a = acc[static_cast<size_t>(ci)];
    a.assign(grid.size(), 0.0);
    std::vector<AxisSplit<T>> ds(static_cast<size_t>(K));
    std::vector<bool> active(static_cast<size_t>(K));
    std::vector<double> gg(static_cast<size_t>(K));
    for (int y = range.begin; y < range.end; ++y) {
      const auto rs = row_split<T>(geom, y);
      const double wv[2] = {1.0 - rs.frac, static_cast<double>(rs.frac)};
      const int jv[2] = {rs.lo, rs.hi};
      for (int x = 0; x < geom.image_w; ++x) {
        const auto& cs = cols[static_cast<size_t>(x)];
        const double wu[2] = {1.0 - cs.frac, static_cast<double>(cs.frac)};
        const int iu[2] = {cs.lo, cs.hi};
        const T* g = guidance.pixel(y, x);
        for (int k = 0; k < K; ++k) {
          const double r = lift_intensity(static_cast<double>(g[k]), D);
          ds[static_cast<size_t>(k)] = depth_split<T>(g[k], D);
          active[static_cast<size_t>(k)] = g[k] >= T(0) && g[k] <= T(1) && r > 0.0 && r < D - 1;
          gg[static_cast<size_t>(k)] = 0.0;
        }
        const T* up = upstream.pixel(y, x);
        for (int p = 0; p < P; ++p) {
          const double u = static_cast<double>(up[p]);
          if (u == 0.0) continue;
          const int ch = routing.slot_channel[static_cast<size_t>(p)];
          const auto& d = ds[static_cast<size_t>(ch)];
          const double wr[2] = {1.0 - d.frac, static_cast<double>(d.frac)};
          const int kz[2] = {d.lo, d.hi};
          double slope = 0.0;
          for (int b = 0; b < 2; ++b)
            for (int aa = 0; aa < 2; ++aa) {
              const double wxy = wu[aa] * wv[b];
              for (int c = 0; c < 2; ++c)
                a[grid.index(jv[b], iu[aa], kz[c], p)] += wxy * wr[c] * u;
              slope += wxy * (static_cast<double>(grid.at(jv[b], iu[aa], kz[1], p)) -
                              static_cast<double>(grid.at(jv[b], iu[aa], kz[0], p)));
            }
          if (active[static_cast<size_t>(ch)]) gg[static_cast<size_t>(ch)] += (D - 1) * u * slope;
        }
        T* og = grads.guidance.pixel(y, x);
        for (int k = 0; k < K; ++k) og[k] = static_cast<T>(gg[static_cast<size_t>(k)]);
      }
    }
  });

  auto out = grads.grid.values();
  for (size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (const auto& a : acc) s += a[i];
    out[i] = static_cast<T>(s);
  }
  return grads;
}

template <class T>
ImageT<T> slice_decomposed(const SubgridSet<T>& set, const ImageT<T>& guidance) {
  const auto& parts = subgrid_slots(set.kind);
  if (set.subgrids.size() != parts.size())
    throw ArgumentError("slice_decomposed: set has " + std::to_string(set.subgrids.size()) + " subgrids, expected " +
                        std::to_string(parts.size()));
  if (guidance.channels() != static_cast<int>(parts.size()))
    throw ArgumentError("slice_decomposed: guidance has " + std::to_string(guidance.channels()) +
                        " channels, need one per subgrid (" + std::to_string(parts.size()) + ")");
  const int P = params_per_cell(set.kind);
  const GridGeometry& geom = set.subgrids.front().geometry();
  ImageT<T> out(geom.image_h, geom.image_w, P);
  for (size_t k = 0; k < parts.size(); ++k) {
    const ImageT<T> part = slice(set.subgrids[k], extract_channel(guidance, static_cast<int>(k)));
    const auto& slots = parts[k];
    for (int y = 0; y < geom.image_h; ++y)
      for (int x = 0; x < geom.image_w; ++x) {
        const T* src = part.pixel(y, x);
        T* dst = out.pixel(y, x);
        for (size_t j = 0; j < slots.size(); ++j) dst[slots[j]] = src[j];
      }
  }
  return out;
}

#define BPAM_INSTANTIATE(T)                                                                              \
  template ImageT<T> slice<T>(const BilateralGridT<T>&, const ImageT<T>&);                               \
  template ImageT<T> slice<T>(const BilateralGridT<T>&, const ImageT<T>&, const SlotRouting&);           \
  template SliceGradients<T> slice_backward<T>(const BilateralGridT<T>&, const ImageT<T>&,                \
                                               const ImageT<T>&, const SlotRouting&);                    \
  template ImageT<T> slice_decomposed<T>(const SubgridSet<T>&, const ImageT<T>&);

BPAM_INSTANTIATE(float)
BPAM_INSTANTIATE(double)
#undef BPAM_INSTANTIATE

}  // namespace bpam
