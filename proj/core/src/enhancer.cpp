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

#include <chrono>
#include <cstdint>
#include <cstring>

#include "bpam/parallel.hpp"
#include "bpam/pipeline.hpp"
#include "fast_math.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace bpam {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0, Clock::time_point t1) {
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

using v16 = float __attribute__((vector_size(64)));
using v8 = float __attribute__((vector_size(32)));
using v4 = float __attribute__((vector_size(16)));

constexpr int kV = 16;        // pixels per guidance vector
constexpr int kTile = 128;    // pixels per tile, a multiple of kV
constexpr int kMaxGuide = 16; // guidance channels supported by the fast path

template <class V>
inline V loadv(const float* p) {
  V v;
  std::memcpy(&v, p, sizeof(V));
  return v;
}

template <class V>
inline void storev(float* p, V v) {
  std::memcpy(p, &v, sizeof(V));
}

template <class V>
inline V lerp(V a, V b, float t) {
  return a + t * (b - a);
}

Enhancer::PackedGrid pack_grid(const BilateralGrid& grid, GridKind kind, bool decomposed) {
  const auto& parts = subgrid_slots(kind);
  Enhancer::PackedGrid pg;
  pg.geom = grid.geometry();
  pg.groups = static_cast<int>(parts.size());
  pg.lanes = kind == GridKind::kStage1 ? 8 : 4;
  for (int g = 0; g < pg.groups; ++g) pg.channel.push_back(decomposed ? g : 0);
  const size_t block = static_cast<size_t>(pg.groups) * pg.lanes;
  const auto& geom = pg.geom;
  pg.cells.assign(static_cast<size_t>(geom.grid_h) * geom.grid_w * geom.depth * block, 0.0f);
  for (int y = 0; y < geom.grid_h; ++y)
    for (int x = 0; x < geom.grid_w; ++x)
      for (int z = 0; z < geom.depth; ++z) {
        const float* src = grid.cell(y, x, z);
        float* dst = pg.cells.data() + ((static_cast<size_t>(y) * geom.grid_w + x) * geom.depth + z) * block;
        for (int g = 0; g < pg.groups; ++g) {
          const auto& slots = parts[static_cast<size_t>(g)];
          for (size_t l = 0; l < slots.size(); ++l) dst[static_cast<size_t>(g) * pg.lanes + l] = src[slots[l]];
        }
      }
  return pg;
}

Enhancer::PackedNet pack_net(const GuidanceNet& n) {
  Enhancer::PackedNet p;
  p.in = n.in_channels;
  p.hidden = n.hidden;
  p.out = n.out_channels;
  p.w1t.resize(n.w1.size());
  for (int j = 0; j < n.hidden; ++j)
    for (int c = 0; c < n.in_channels; ++c)
      p.w1t[static_cast<size_t>(c) * n.hidden + j] = n.w1[static_cast<size_t>(j) * n.in_channels + c];
  p.b1 = n.b1;
  p.w2 = n.w2;
  p.b2 = n.b2;
  return p;
}

struct Split {
  int lo = 0;
  int hi = 0;
  float frac = 0.0f;
};

Split make_split(double c, int dim) {
  const auto s = split_frac<float>(c, dim);
  return {s.index, std::min(s.index + 1, dim - 1), s.frac};
}

// Depth lookups of one tile: offset of the lower depth slice inside a grid
// column (in floats) and the fraction towards the next slice, per guidance
// channel and pixel.
struct DepthTaps {
  std::int32_t off[kMaxGuide][kTile];
  float frac[kMaxGuide][kTile];
};

struct DepthRule {
  float scale = 0.0f;  // depth - 1
  int max_lo = 0;      // max(depth - 2, 0)
  int block = 0;       // floats per depth slice
};

inline void store_taps(const float* g, int k, int base, const DepthRule& rule, DepthTaps& taps) {
  for (int i = 0; i < kV; ++i) {
    const float r = detail::fast_sigmoid(g[i]) * rule.scale;
    int lo = static_cast<int>(r);
    lo = lo < rule.max_lo ? lo : rule.max_lo;
    float f = r - static_cast<float>(lo);
    f = f < 1.0f ? f : 1.0f;
    taps.off[k][base + i] = lo * rule.block;
    taps.frac[k][base + i] = f;
  }
}

// Register-blocked guidance net over 16-pixel vectors: the hidden unit and
// all K accumulators stay in vector registers.
template <int C, int K>
void guidance_tile(const Enhancer::PackedNet& n, const float* planes, int count, const DepthRule& rule,
                   DepthTaps& taps) {
  const int H = n.hidden;
  for (int base = 0; base < count; base += kV) {
    v16 x[C];
    for (int c = 0; c < C; ++c) x[c] = loadv<v16>(planes + c * kTile + base);
    v16 acc[K];
    for (int k = 0; k < K; ++k) acc[k] = v16{} + n.b2[static_cast<size_t>(k)];
    for (int j = 0; j < H; ++j) {
      v16 h = v16{} + n.b1[static_cast<size_t>(j)];
      for (int c = 0; c < C; ++c) h += n.w1t[static_cast<size_t>(c) * H + j] * x[c];
      h = h > 0.0f ? h : 0.0f;
      for (int k = 0; k < K; ++k) acc[k] += n.w2[static_cast<size_t>(k) * H + j] * h;
    }
    for (int k = 0; k < K; ++k) {
      float a[kV];
      storev(a, acc[k]);
      store_taps(a, k, base, rule, taps);
    }
  }
}

// Any other channel combination.
void guidance_tile_generic(const Enhancer::PackedNet& n, const float* planes, int count, const DepthRule& rule,
                           DepthTaps& taps) {
  const int C = n.in, H = n.hidden, K = n.out;
  for (int base = 0; base < count; base += kV) {
    for (int k = 0; k < K; ++k) {
      v16 acc = v16{} + n.b2[static_cast<size_t>(k)];
      for (int j = 0; j < H; ++j) {
        v16 h = v16{} + n.b1[static_cast<size_t>(j)];
        for (int c = 0; c < C; ++c) h += n.w1t[static_cast<size_t>(c) * H + j] * loadv<v16>(planes + c * kTile + base);
        h = h > 0.0f ? h : 0.0f;
        acc += n.w2[static_cast<size_t>(k) * H + j] * h;
      }
      float a[kV];
      storev(a, acc);
      store_taps(a, k, base, rule, taps);
    }
  }
}

void guidance(const Enhancer::PackedNet& n, const float* planes, int count, const DepthRule& rule, DepthTaps& taps) {
  if (n.in == 3 && n.out == 1) return guidance_tile<3, 1>(n, planes, count, rule, taps);
  if (n.in == 3 && n.out == 3) return guidance_tile<3, 3>(n, planes, count, rule, taps);
  if (n.in == 3 && n.out == 4) return guidance_tile<3, 4>(n, planes, count, rule, taps);
  if (n.in == 8 && n.out == 1) return guidance_tile<8, 1>(n, planes, count, rule, taps);
  if (n.in == 8 && n.out == 9) return guidance_tile<8, 9>(n, planes, count, rule, taps);
  guidance_tile_generic(n, planes, count, rule, taps);
}

// Grid columns [c0, c1] of the current image row, lerped between the two
// bracketing grid rows.
struct RowCells {
  std::vector<float> data;
  int c0 = 0;
  size_t cell_stride = 0;

  void build(const Enhancer::PackedGrid& pg, const Split& rs, int first, int last) {
    const auto& geom = pg.geom;
    cell_stride = static_cast<size_t>(geom.depth) * pg.groups * pg.lanes;
    c0 = first;
    const size_t row = static_cast<size_t>(geom.grid_w) * cell_stride;
    const float* a = pg.cells.data() + rs.lo * row + first * cell_stride;
    const float* b = pg.cells.data() + rs.hi * row + first * cell_stride;
    const size_t n = static_cast<size_t>(last - first + 1) * cell_stride;
    float* d = data.data();
    const float t = rs.frac;
    for (size_t i = 0; i < n; ++i) d[i] = a[i] + t * (b[i] - a[i]);
  }
  const float* column(int c) const { return data.data() + static_cast<size_t>(c - c0) * cell_stride; }
};

// Slices every group for pixels [x0, x0 + count) into out (count x block).
template <class V, int L>
void slice_tile(const Enhancer::PackedGrid& pg, const RowCells& rc, const std::vector<Split>& cols, int x0,
                int count, const DepthTaps& taps, float* out) {
  const int G = pg.groups;
  const size_t block = static_cast<size_t>(G) * L;
  const std::int32_t step = pg.geom.depth > 1 ? static_cast<std::int32_t>(block) : 0;
  for (int i = 0; i < count; ++i) {
    const Split& cs = cols[static_cast<size_t>(x0 + i)];
    const float* lo = rc.column(cs.lo);
    const float* hi = rc.column(cs.hi);
    const float du = cs.frac;
    float* o = out + static_cast<size_t>(i) * block;
    for (int g = 0; g < G; ++g) {
      const int k = pg.channel[static_cast<size_t>(g)];
      const std::int32_t off = taps.off[k][i] + g * L;
      const float dr = taps.frac[k][i];
      const V a = lerp(loadv<V>(lo + off), loadv<V>(lo + off + step), dr);
      const V b = lerp(loadv<V>(hi + off), loadv<V>(hi + off + step), dr);
      storev(o + g * L, lerp(a, b, du));
    }
  }
}

inline float clamp_unit(float v) {
  v = v > 0.0f ? v : 0.0f;
  return v < 1.0f ? v : 1.0f;
}

struct Scratch {
  std::vector<float> planes;  // input planes, kMaxGuide x kTile
  std::vector<float> zplanes; // hidden planes, 8 x kTile
  std::vector<float> s1, s2;  // sliced parameters per pixel
  DepthTaps taps1, taps2;
  RowCells rows1, rows2;
};

}  // namespace

Enhancer::Enhancer(const Model& model) : model_(model) {
  model_.validate();
  const auto kinds = grid_kinds(model_.config);
  for (size_t i = 0; i < kinds.size(); ++i)
    packed_.push_back(pack_grid(model_.grids[i], kinds[i], model_.config.decomposed));
  net1_ = pack_net(model_.gnet1);
  if (kinds.size() > 1) net2_ = pack_net(model_.gnet2);
  if (net1_.out > kMaxGuide || net2_.out > kMaxGuide)
    throw ArgumentError("guidance nets wider than " + std::to_string(kMaxGuide) + " outputs are unsupported");
}

Image Enhancer::run(const Image& img, StageTimings* timings) const {
  const auto& geom = packed_.front().geom;
  if (img.channels() != kColorChannels)
    throw ArgumentError("enhance input must have 3 channels, got " + std::to_string(img.channels()));
  if (img.height() != geom.image_h || img.width() != geom.image_w)
    throw ArgumentError("image is " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                        ", grid geometry expects " + std::to_string(geom.image_h) + "x" +
                        std::to_string(geom.image_w));
  const auto t_start = Clock::now();
  // Stage clocks are read only when a breakdown is requested.
  const bool timed = timings != nullptr;
  auto now = [timed] { return timed ? Clock::now() : Clock::time_point{}; };
  const bool mlp = model_.config.mode == TransformMode::kMlp;
  const bool clamp = model_.config.clamp_output;
  const int H = img.height(), W = img.width();
  Image out(H, W, kColorChannels);

  std::vector<Split> cols(static_cast<size_t>(W));
  for (int x = 0; x < W; ++x)
    cols[static_cast<size_t>(x)] = make_split(lift_axis(x, W, geom.grid_w, geom.align_centers), geom.grid_w);

  const PackedGrid& pg1 = packed_[0];
  const size_t block1 = static_cast<size_t>(pg1.groups) * pg1.lanes;
  const size_t block2 = mlp ? static_cast<size_t>(packed_[1].groups) * packed_[1].lanes : 0;
  const DepthRule rule1{static_cast<float>(geom.depth - 1), std::max(geom.depth - 2, 0), static_cast<int>(block1)};
  const DepthRule rule2{static_cast<float>(geom.depth - 1), std::max(geom.depth - 2, 0), static_cast<int>(block2)};
  const size_t row_floats1 = static_cast<size_t>(geom.grid_w) * geom.depth * block1;
  const size_t row_floats2 = static_cast<size_t>(geom.grid_w) * geom.depth * block2;

  // Per-stage time summed over worker threads.
  double stage_ms[5] = {0, 0, 0, 0, 0};

  const int threads = num_threads();
#if defined(_OPENMP)
#pragma omp parallel num_threads(threads)
#endif
  {
    Scratch s;
    s.planes.assign(static_cast<size_t>(kMaxGuide) * kTile, 0.0f);
    s.zplanes.assign(static_cast<size_t>(kHiddenUnits) * kTile, 0.0f);
    s.s1.resize(static_cast<size_t>(kTile) * block1);
    s.rows1.data.resize(row_floats1);
    if (mlp) {
      s.s2.resize(static_cast<size_t>(kTile) * block2);
      s.rows2.data.resize(row_floats2);
    }
    double local[5] = {0, 0, 0, 0, 0};

#if defined(_OPENMP)
#pragma omp for schedule(static)
#endif
    for (int y = 0; y < H; ++y) {
      const float* in = img.pixel(y, 0);
      float* orow = out.pixel(y, 0);
      const Split rs = make_split(lift_axis(y, geom.image_h, geom.grid_h, geom.align_centers), geom.grid_h);
      for (int x0 = 0; x0 < W; x0 += kTile) {
        const int count = std::min(kTile, W - x0);
        const int padded = (count + kV - 1) / kV * kV;
        const int first = cols[static_cast<size_t>(x0)].lo;
        const int last = cols[static_cast<size_t>(x0 + count - 1)].hi;

        auto t0 = now();
        for (int i = 0; i < count; ++i)
          for (int c = 0; c < kColorChannels; ++c) s.planes[static_cast<size_t>(c) * kTile + i] = in[3 * (x0 + i) + c];
        guidance(net1_, s.planes.data(), padded, rule1, s.taps1);
        auto t1 = now();
        s.rows1.build(pg1, rs, first, last);
        if (pg1.lanes == 8)
          slice_tile<v8, 8>(pg1, s.rows1, cols, x0, count, s.taps1, s.s1.data());
        else
          slice_tile<v4, 4>(pg1, s.rows1, cols, x0, count, s.taps1, s.s1.data());
        auto t2 = now();
        local[0] += ms_since(t0, t1);
        local[1] += ms_since(t1, t2);

        if (!mlp) {
          for (int i = 0; i < count; ++i) {
            const float* p = s.s1.data() + static_cast<size_t>(i) * block1;
            const float* c = in + 3 * (x0 + i);
            float* d = orow + 3 * (x0 + i);
            for (int oc = 0; oc < 3; ++oc) {
              const float* r = p + oc * 4;
              const float v = r[3] + r[0] * c[0] + r[1] * c[1] + r[2] * c[2];
              d[oc] = clamp ? clamp_unit(v) : v;
            }
          }
          local[2] += ms_since(t2, now());
          continue;
        }

        for (int i = 0; i < count; ++i) {
          const float* p = s.s1.data() + static_cast<size_t>(i) * block1;
          const float* c = in + 3 * (x0 + i);
          v8 z = loadv<v8>(p + 24) + c[0] * loadv<v8>(p) + c[1] * loadv<v8>(p + 8) + c[2] * loadv<v8>(p + 16);
          z = z > 0.0f ? z : 0.0f;
          for (int h = 0; h < kHiddenUnits; ++h) s.zplanes[static_cast<size_t>(h) * kTile + i] = z[h];
        }
        auto t3 = now();
        guidance(net2_, s.zplanes.data(), padded, rule2, s.taps2);
        auto t4 = now();
        s.rows2.build(packed_[1], rs, first, last);
        slice_tile<v4, 4>(packed_[1], s.rows2, cols, x0, count, s.taps2, s.s2.data());
        auto t5 = now();
        for (int i = 0; i < count; ++i) {
          const float* p = s.s2.data() + static_cast<size_t>(i) * block2;
          v4 acc = loadv<v4>(p + 32);
          for (int h = 0; h < kHiddenUnits; ++h) acc += s.zplanes[static_cast<size_t>(h) * kTile + i] * loadv<v4>(p + 4 * h);
          float* d = orow + 3 * (x0 + i);
          for (int oc = 0; oc < 3; ++oc) d[oc] = clamp ? clamp_unit(acc[oc]) : acc[oc];
        }
        auto t6 = now();
        local[2] += ms_since(t2, t3);
        local[0] += ms_since(t3, t4);
        local[3] += ms_since(t4, t5);
        local[4] += ms_since(t5, t6);
      }
    }
#if defined(_OPENMP)
#pragma omp critical
#endif
    for (int i = 0; i < 5; ++i) stage_ms[i] += local[i];
  }

  if (timings) {
    const double wall = ms_since(t_start, Clock::now());
    double sum = 0.0;
    for (double v : stage_ms) sum += v;
    // Attribute wall time to stages in proportion to their thread time.
    const double scale = sum > 0.0 ? wall / sum : 0.0;
    timings->guidance_ms = stage_ms[0] * scale;
    timings->slice1_ms = stage_ms[1] * scale;
    timings->mlp1_ms = stage_ms[2] * scale;
    timings->slice2_ms = stage_ms[3] * scale;
    timings->mlp2_ms = stage_ms[4] * scale;
    timings->total_ms = wall;
  }
  return out;
}

Image enhance(const Image& img, const Model& model, StageTimings* timings) {
  return Enhancer(model).run(img, timings);
}

}  // namespace bpam
