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

#include "bpam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bpam/parallel.hpp"

namespace bpam {

std::vector<GridKind> grid_kinds(const PipelineConfig& cfg) {
  if (cfg.mode == TransformMode::kAffine) return {GridKind::kAffine};
  return {GridKind::kStage1, GridKind::kStage2};
}

SlotRouting routing_for(const PipelineConfig& cfg, GridKind kind) {
  return cfg.decomposed ? SlotRouting::decomposed(kind) : SlotRouting::monolithic(params_per_cell(kind));
}

int guidance_channels(const PipelineConfig& cfg, int stage) {
  const auto kinds = grid_kinds(cfg);
  if (stage < 0 || stage >= static_cast<int>(kinds.size())) return 0;
  return routing_for(cfg, kinds[static_cast<size_t>(stage)]).channels;
}

int guidance_inputs(int stage) { return stage == 0 ? kColorChannels : kHiddenUnits; }

std::string to_string(TransformMode mode) { return mode == TransformMode::kAffine ? "affine" : "mlp"; }

TransformMode parse_mode(const std::string& s) {
  if (s == "affine") return TransformMode::kAffine;
  if (s == "mlp") return TransformMode::kMlp;
  throw ArgumentError("unknown transform mode '" + s + "' (expected affine or mlp)");
}

template <class T>
ModelT<T> ModelT<T>::identity(const PipelineConfig& cfg, const GridGeometry& geom, std::uint64_t seed) {
  ModelT m;
  m.config = cfg;
  const auto kinds = grid_kinds(cfg);
  for (GridKind k : kinds) m.grids.push_back(identity_grid<T>(geom, k));
  m.gnet1 = GuidanceNetT<T>::create(guidance_inputs(0), guidance_channels(cfg, 0), seed, cfg.guidance_hidden);
  if (kinds.size() > 1)
    m.gnet2 = GuidanceNetT<T>::create(guidance_inputs(1), guidance_channels(cfg, 1), seed + 1, cfg.guidance_hidden);
  return m;
}

template <class T>
ModelT<T> ModelT<T>::random(const PipelineConfig& cfg, const GridGeometry& geom, std::uint64_t seed,
                            double grid_noise, double net_scale) {
  ModelT m = identity(cfg, geom, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uni(-grid_noise, grid_noise);
  std::normal_distribution<double> normal(0.0, net_scale);
  for (auto& g : m.grids)
    for (T& v : g.values()) v = static_cast<T>(static_cast<double>(v) + uni(rng));
  auto fill = [&](GuidanceNetT<T>& n) {
    const double s1 = 1.0 / std::sqrt(static_cast<double>(n.in_channels));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(n.hidden));
    for (T& v : n.w1) v = static_cast<T>(normal(rng) * s1);
    for (T& v : n.b1) v = static_cast<T>(normal(rng) * 0.5);
    for (T& v : n.w2) v = static_cast<T>(normal(rng) * s2);
    for (T& v : n.b2) v = static_cast<T>(normal(rng) * 0.5);
  };
  fill(m.gnet1);
  if (m.gnet2.out_channels > 0) fill(m.gnet2);
  return m;
}

template <class T>
ModelT<T> ModelT<T>::zeros_like() const {
  ModelT z;
  z.config = config;
  for (const auto& g : grids) z.grids.emplace_back(g.geometry(), g.params());
  z.gnet1 = gnet1.zeros_like();
  if (gnet2.out_channels > 0) z.gnet2 = gnet2.zeros_like();
  return z;
}

template <class T>
ParamList<T> ModelT<T>::parameters() {
  using u32 = std::uint32_t;
  ParamList<T> out;
  for (size_t i = 0; i < grids.size(); ++i) {
    auto& g = grids[i];
    out.push_back({"grid" + std::to_string(i + 1),
                   {u32(g.grid_h()), u32(g.grid_w()), u32(g.depth()), u32(g.params())},
                   g.values()});
  }
  for (auto& p : guidance_parameters()) out.push_back(std::move(p));
  return out;
}

template <class T>
ParamList<T> ModelT<T>::guidance_parameters() {
  ParamList<T> out = gnet1.parameters("gnet1");
  if (gnet2.out_channels > 0)
    for (auto& p : gnet2.parameters("gnet2")) out.push_back(std::move(p));
  return out;
}

template <class T>
void ModelT<T>::validate() const {
  const auto kinds = grid_kinds(config);
  if (grids.size() != kinds.size())
    throw ArgumentError(to_string(config.mode) + " model needs " + std::to_string(kinds.size()) + " grid(s), has " +
                        std::to_string(grids.size()));
  for (size_t i = 0; i < kinds.size(); ++i) {
    if (grids[i].params() != params_per_cell(kinds[i]))
      throw ArgumentError("grid " + std::to_string(i + 1) + " has " + std::to_string(grids[i].params()) +
                          " params per cell, expected " + std::to_string(params_per_cell(kinds[i])));
    if (!(grids[i].geometry() == grids[0].geometry()))
      throw ArgumentError("grids of one model must share their geometry");
  }
  const GuidanceNetT<T>* nets[2] = {&gnet1, &gnet2};
  for (size_t s = 0; s < kinds.size(); ++s) {
    const int want_in = guidance_inputs(static_cast<int>(s));
    const int want_out = guidance_channels(config, static_cast<int>(s));
    if (nets[s]->in_channels != want_in || nets[s]->out_channels != want_out)
      throw ArgumentError("guidance net " + std::to_string(s + 1) + " is " + std::to_string(nets[s]->in_channels) +
                          "->" + std::to_string(nets[s]->out_channels) + ", configuration needs " +
                          std::to_string(want_in) + "->" + std::to_string(want_out));
  }
}

namespace {

template <class T>
void check_input(const ModelT<T>& model, const ImageT<T>& img) {
  model.validate();
  if (img.channels() != kColorChannels)
    throw ArgumentError("pipeline input must have 3 channels, got " + std::to_string(img.channels()));
  const auto& geom = model.grids.front().geometry();
  if (img.height() != geom.image_h || img.width() != geom.image_w)
    throw ArgumentError("image is " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                        ", grid geometry expects " + std::to_string(geom.image_h) + "x" +
                        std::to_string(geom.image_w));
}

template <class T>
Color<T> color_at(const ImageT<T>& img, int y, int x) {
  const T* p = img.pixel(y, x);
  return {p[0], p[1], p[2]};
}

}  // namespace

template <class T>
ForwardCache<T> pipeline_forward(const ModelT<T>& model, const ImageT<T>& img) {
  check_input(model, img);
  const auto& cfg = model.config;
  const auto kinds = grid_kinds(cfg);
  const int H = img.height(), W = img.width();
  ForwardCache<T> c;
  c.input = img;
  c.guide1 = guidance_forward(model.gnet1, img);
  c.sliced1 = slice(model.grids[0], c.guide1, routing_for(cfg, kinds[0]));
  c.raw = ImageT<T>(H, W, kColorChannels);

  if (cfg.mode == TransformMode::kAffine) {
    parallel_for(0, H, [&](int y) {
      for (int x = 0; x < W; ++x) {
        const auto p = AffineParams<T>::from_slots({c.sliced1.pixel(y, x), static_cast<size_t>(kAffineParams)});
        const auto o = apply_affine(p, color_at(img, y, x));
        std::copy(o.begin(), o.end(), c.raw.pixel(y, x));
      }
    });
  } else {
    c.pre1 = ImageT<T>(H, W, kHiddenUnits);
    c.hidden = ImageT<T>(H, W, kHiddenUnits);
    parallel_for(0, H, [&](int y) {
      for (int x = 0; x < W; ++x) {
        const T* s = c.sliced1.pixel(y, x);
        const auto pre = mlp_stage1_linear<T>({s, 24}, {s + b1_slot(0), 8}, color_at(img, y, x));
        T* pp = c.pre1.pixel(y, x);
        T* zz = c.hidden.pixel(y, x);
        for (int h = 0; h < kHiddenUnits; ++h) {
          pp[h] = pre[static_cast<size_t>(h)];
          zz[h] = pre[static_cast<size_t>(h)] > T(0) ? pre[static_cast<size_t>(h)] : T(0);
        }
      }
    });
    c.guide2 = guidance_forward(model.gnet2, c.hidden);
    c.sliced2 = slice(model.grids[1], c.guide2, routing_for(cfg, kinds[1]));
    parallel_for(0, H, [&](int y) {
      for (int x = 0; x < W; ++x) {
        const T* s = c.sliced2.pixel(y, x);
        const T* zp = c.hidden.pixel(y, x);
        Hidden<T> z;
        std::copy(zp, zp + kHiddenUnits, z.begin());
        const auto o = mlp_stage2<T>({s, 24}, {s + b2_slot(0), 3}, z);
        std::copy(o.begin(), o.end(), c.raw.pixel(y, x));
      }
    });
  }

  c.output = c.raw;
  if (cfg.clamp_output)
    for (T& v : c.output.values()) v = std::clamp(v, T(0), T(1));
  return c;
}

template <class T>
ModelT<T> pipeline_backward(const ModelT<T>& model, const ForwardCache<T>& cache, const ImageT<T>& upstream) {
  if (cache.output.empty() || cache.input.empty())
    throw StateError("pipeline_backward called without a forward cache");
  model.validate();
  if (!cache.output.same_shape(upstream))
    throw ArgumentError("pipeline_backward: upstream gradient shape does not match the forward output");
  const auto& cfg = model.config;
  const auto kinds = grid_kinds(cfg);
  const bool mlp = cfg.mode == TransformMode::kMlp;
  if (mlp && (cache.hidden.empty() || cache.sliced2.empty()))
    throw StateError("forward cache was produced by an affine model");
  const ImageT<T>& img = cache.input;
  const int H = img.height(), W = img.width();
  ModelT<T> grad = model.zeros_like();

  // Clamp is straight-through: upstream is used as dL/d(raw).
  ImageT<T> dsliced1(H, W, params_per_cell(kinds[0]));

  if (!mlp) {
    parallel_for(0, H, [&](int y) {
      for (int x = 0; x < W; ++x) {
        const T* in = img.pixel(y, x);
        const T* d = upstream.pixel(y, x);
        T* ds = dsliced1.pixel(y, x);
        for (int o = 0; o < kColorChannels; ++o) {
          for (int c = 0; c < kColorChannels; ++c) ds[alpha_slot(o, c)] = d[o] * in[c];
          ds[beta_slot(o)] = d[o];
        }
      }
    });
  } else {
    ImageT<T> dsliced2(H, W, kStage2Params);
    ImageT<T> dhidden(H, W, kHiddenUnits);
    parallel_for(0, H, [&](int y) {
      for (int x = 0; x < W; ++x) {
        const T* d = upstream.pixel(y, x);
        const T* z = cache.hidden.pixel(y, x);
        const T* s = cache.sliced2.pixel(y, x);
        T* ds = dsliced2.pixel(y, x);
        T* dz = dhidden.pixel(y, x);
        for (int h = 0; h < kHiddenUnits; ++h) dz[h] = T(0);
        for (int o = 0; o < kColorChannels; ++o) {
          for (int h = 0; h < kHiddenUnits; ++h) {
            ds[w2_slot(o, h)] = d[o] * z[h];
            dz[h] += s[w2_slot(o, h)] * d[o];
          }
          ds[b2_slot(o)] = d[o];
        }
      }
    });
    auto sg2 = slice_backward(model.grids[1], cache.guide2, dsliced2, routing_for(cfg, kinds[1]));
    grad.grids[1] = std::move(sg2.grid);
    auto gg2 = guidance_backward(model.gnet2, cache.hidden, sg2.guidance, true);
    grad.gnet2 = std::move(gg2.net);
    auto dh = dhidden.values();
    auto dg = gg2.input.values();
    auto pre = cache.pre1.values();
    for (size_t i = 0; i < dh.size(); ++i) dh[i] = pre[i] > T(0) ? dh[i] + dg[i] : T(0);

    parallel_for(0, H, [&](int y) {
      for (int x = 0; x < W; ++x) {
        const T* in = img.pixel(y, x);
        const T* dp = dhidden.pixel(y, x);
        T* ds = dsliced1.pixel(y, x);
        for (int h = 0; h < kHiddenUnits; ++h) {
          for (int c = 0; c < kColorChannels; ++c) ds[w1_slot(h, c)] = dp[h] * in[c];
          ds[b1_slot(h)] = dp[h];
        }
      }
    });
  }

  auto sg1 = slice_backward(model.grids[0], cache.guide1, dsliced1, routing_for(cfg, kinds[0]));
  grad.grids[0] = std::move(sg1.grid);
  grad.gnet1 = guidance_backward(model.gnet1, img, sg1.guidance, false).net;
  return grad;
}

template struct ModelT<float>;
template struct ModelT<double>;
template ForwardCache<float> pipeline_forward(const ModelT<float>&, const ImageT<float>&);
template ForwardCache<double> pipeline_forward(const ModelT<double>&, const ImageT<double>&);
template ModelT<float> pipeline_backward(const ModelT<float>&, const ForwardCache<float>&, const ImageT<float>&);
template ModelT<double> pipeline_backward(const ModelT<double>&, const ForwardCache<double>&, const ImageT<double>&);

}  // namespace bpam
