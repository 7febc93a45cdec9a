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

#include "bpam/producer.hpp"

#include <cmath>
#include <random>
#include <string>

#include "bpam/containers.hpp"
#include "bpam/parallel.hpp"
#include "bpam/resample.hpp"

namespace bpam {

int ProducerConfig::reduction() const {
  int r = unshuffle;
  for (const auto& c : convs) r *= c.stride;
  return r;
}

namespace {

int conv_out(int n, int stride) { return (n - 1) / stride + 1; }

void validate_config(const ProducerConfig& c) {
  if (c.in_channels < 1 || c.unshuffle < 1 || c.depth < 1 || c.heads.empty())
    throw ArgumentError("invalid producer configuration");
  for (const auto& s : c.convs)
    if (s.out_channels < 1 || s.stride < 1) throw ArgumentError("invalid producer convolution spec");
}

int feature_channels(const ProducerConfig& c) {
  return (c.convs.empty() ? c.in_channels : c.convs.back().out_channels) * c.unshuffle * c.unshuffle;
}

template <class T>
ImageT<T> conv3x3_relu(const ConvLayerT<T>& layer, const ImageT<T>& in) {
  const int oh = conv_out(in.height(), layer.stride);
  const int ow = conv_out(in.width(), layer.stride);
  const int C = layer.in_channels, O = layer.out_channels, s = layer.stride;
  ImageT<T> out(oh, ow, O);
  parallel_for(0, oh, [&](int oy) {
    for (int ox = 0; ox < ow; ++ox) {
      T* o = out.pixel(oy, ox);
      for (int k = 0; k < O; ++k) o[k] = layer.bias[static_cast<size_t>(k)];
      for (int ky = 0; ky < 3; ++ky) {
        const int iy = oy * s + ky - 1;
        if (iy < 0 || iy >= in.height()) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int ix = ox * s + kx - 1;
          if (ix < 0 || ix >= in.width()) continue;
          const T* p = in.pixel(iy, ix);
          for (int k = 0; k < O; ++k) {
            const T* w = layer.weight.data() + (static_cast<size_t>(k) * C) * 9 + ky * 3 + kx;
            T acc = 0;
            for (int c = 0; c < C; ++c) acc += w[static_cast<size_t>(c) * 9] * p[c];
            o[k] += acc;
          }
        }
      }
      for (int k = 0; k < O; ++k) o[k] = o[k] > T(0) ? o[k] : T(0);
    }
  });
  return out;
}

template <class T>
ImageT<T> head_forward(const GridHeadT<T>& head, const ImageT<T>& feat) {
  ImageT<T> out(feat.height(), feat.width(), head.out_channels);
  const int C = head.in_channels;
  for (int y = 0; y < feat.height(); ++y)
    for (int x = 0; x < feat.width(); ++x) {
      const T* f = feat.pixel(y, x);
      T* o = out.pixel(y, x);
      for (int q = 0; q < head.out_channels; ++q) {
        T s = head.bias[static_cast<size_t>(q)];
        const T* w = head.weight.data() + static_cast<size_t>(q) * C;
        for (int c = 0; c < C; ++c) s += w[c] * f[c];
        o[q] = s;
      }
    }
  return out;
}

template <class T>
void check_geometry(const ProducerNetT<T>& net, const ImageT<T>& lowres, const GridGeometry& geom) {
  if (lowres.channels() != net.config.in_channels)
    throw ArgumentError("producer expects " + std::to_string(net.config.in_channels) + " input channels, got " +
                        std::to_string(lowres.channels()));
  const auto [gh, gw] = producer_grid_dims(net.config, lowres.height(), lowres.width());
  if (gh != geom.grid_h || gw != geom.grid_w || geom.depth != net.config.depth)
    throw ArgumentError("producer shape mismatch: a " + std::to_string(lowres.height()) + "x" +
                        std::to_string(lowres.width()) + " input yields grids " + std::to_string(gh) + "x" +
                        std::to_string(gw) + "x" + std::to_string(net.config.depth) + ", geometry expects " +
                        std::to_string(geom.grid_h) + "x" + std::to_string(geom.grid_w) + "x" +
                        std::to_string(geom.depth));
}

}  // namespace

template <class T>
std::vector<ImageT<T>> conv_stack(const ProducerNetT<T>& net, const ImageT<T>& lowres) {
  if (lowres.channels() != net.config.in_channels)
    throw ArgumentError("producer expects " + std::to_string(net.config.in_channels) + " input channels, got " +
                        std::to_string(lowres.channels()));
  std::vector<ImageT<T>> acts{lowres};
  for (const auto& layer : net.convs) acts.push_back(conv3x3_relu(layer, acts.back()));
  return acts;
}

std::pair<int, int> producer_grid_dims(const ProducerConfig& config, int height, int width) {
  validate_config(config);
  int h = height, w = width;
  for (const auto& c : config.convs) {
    h = conv_out(h, c.stride);
    w = conv_out(w, c.stride);
  }
  if (h % config.unshuffle != 0 || w % config.unshuffle != 0)
    throw ArgumentError("producer feature map " + std::to_string(h) + "x" + std::to_string(w) +
                        " is not divisible by the unshuffle factor " + std::to_string(config.unshuffle));
  return {h / config.unshuffle, w / config.unshuffle};
}

template <class T>
ProducerNetT<T> ProducerNetT<T>::create(const ProducerConfig& config, std::uint64_t seed) {
  validate_config(config);
  ProducerNetT net;
  net.config = config;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  int in = config.in_channels;
  for (const auto& spec : config.convs) {
    ConvLayerT<T> layer{in, spec.out_channels, spec.stride, {}, {}};
    const double scale = std::sqrt(2.0 / (in * 9.0));
    layer.weight.resize(static_cast<size_t>(spec.out_channels) * in * 9);
    for (auto& w : layer.weight) w = static_cast<T>(normal(rng) * scale);
    layer.bias.assign(static_cast<size_t>(spec.out_channels), T(0));
    net.convs.push_back(std::move(layer));
    in = spec.out_channels;
  }
  const int feat = feature_channels(config);
  for (GridKind kind : config.heads) {
    const int P = params_per_cell(kind);
    GridHeadT<T> head{kind, feat, config.depth * P, {}, {}};
    head.weight.assign(static_cast<size_t>(head.out_channels) * feat, T(0));
    head.bias.resize(static_cast<size_t>(head.out_channels));
    const auto cell = identity_cell(kind);
    for (int p = 0; p < P; ++p)
      for (int z = 0; z < config.depth; ++z)
        head.bias[static_cast<size_t>(config.depth * p + z)] = static_cast<T>(cell[static_cast<size_t>(p)]);
    net.heads.push_back(std::move(head));
  }
  return net;
}

template <class T>
ProducerNetT<T> ProducerNetT<T>::zeros_like() const {
  ProducerNetT z = *this;
  for (auto& c : z.convs) {
    std::fill(c.weight.begin(), c.weight.end(), T(0));
    std::fill(c.bias.begin(), c.bias.end(), T(0));
  }
  for (auto& h : z.heads) {
    std::fill(h.weight.begin(), h.weight.end(), T(0));
    std::fill(h.bias.begin(), h.bias.end(), T(0));
  }
  return z;
}

template <class T>
ParamList<T> ProducerNetT<T>::parameters(const std::string& prefix) {
  using u32 = std::uint32_t;
  ParamList<T> out;
  for (size_t i = 0; i < convs.size(); ++i) {
    auto& c = convs[i];
    const std::string base = prefix + ".conv" + std::to_string(i);
    out.push_back({base + ".weight", {u32(c.out_channels), u32(c.in_channels), 3u, 3u}, c.weight});
    out.push_back({base + ".bias", {u32(c.out_channels)}, c.bias});
  }
  for (size_t i = 0; i < heads.size(); ++i) {
    auto& h = heads[i];
    const std::string base = prefix + ".head" + std::to_string(i);
    out.push_back({base + ".weight", {u32(h.out_channels), u32(h.in_channels)}, h.weight});
    out.push_back({base + ".bias", {u32(h.out_channels)}, h.bias});
  }
  return out;
}

template <class T>
std::vector<BilateralGridT<T>> produce_grids(const ProducerNetT<T>& net, const ImageT<T>& lowres,
                                             const GridGeometry& geom) {
  check_geometry(net, lowres, geom);
  const auto acts = conv_stack(net, lowres);
  const ImageT<T> feat = pixel_unshuffle(acts.back(), net.config.unshuffle);
  std::vector<BilateralGridT<T>> grids;
  for (const auto& head : net.heads)
    grids.push_back(unroll_grid(head_forward(head, feat), net.config.depth, params_per_cell(head.kind), geom));
  return grids;
}

template <class T>
ProducerNetT<T> producer_backward(const ProducerNetT<T>& net, const ImageT<T>& lowres, const GridGeometry& geom,
                                  const std::vector<BilateralGridT<T>>& upstream) {
  check_geometry(net, lowres, geom);
  if (upstream.size() != net.heads.size())
    throw ArgumentError("producer_backward: expected " + std::to_string(net.heads.size()) + " grid gradients, got " +
                        std::to_string(upstream.size()));
  const auto acts = conv_stack(net, lowres);
  const ImageT<T> feat = pixel_unshuffle(acts.back(), net.config.unshuffle);
  ProducerNetT<T> grad = net.zeros_like();

  // Heads: 1x1 convolutions fed by the unshuffled features.
  ImageT<double> dfeat(feat.height(), feat.width(), feat.channels());
  for (size_t hi = 0; hi < net.heads.size(); ++hi) {
    const auto& head = net.heads[hi];
    const auto& up = upstream[hi];
    if (up.params() != params_per_cell(head.kind) || !(up.geometry() == geom))
      throw ArgumentError("producer_backward: grid gradient " + std::to_string(hi) + " has the wrong shape");
    const ImageT<T> dout = roll_grid(up);  // adjoint of unroll
    auto& gh = grad.heads[hi];
    const int C = head.in_channels;
    std::vector<double> gw(head.weight.size(), 0.0), gb(head.bias.size(), 0.0);
    for (int y = 0; y < feat.height(); ++y)
      for (int x = 0; x < feat.width(); ++x) {
        const T* f = feat.pixel(y, x);
        const T* d = dout.pixel(y, x);
        double* df = dfeat.pixel(y, x);
        for (int q = 0; q < head.out_channels; ++q) {
          const double dq = d[q];
          if (dq == 0.0) continue;
          gb[static_cast<size_t>(q)] += dq;
          const T* w = head.weight.data() + static_cast<size_t>(q) * C;
          double* g = gw.data() + static_cast<size_t>(q) * C;
          for (int c = 0; c < C; ++c) {
            g[c] += dq * f[c];
            df[c] += dq * w[c];
          }
        }
      }
    for (size_t i = 0; i < gw.size(); ++i) gh.weight[i] = static_cast<T>(gw[i]);
    for (size_t i = 0; i < gb.size(); ++i) gh.bias[i] = static_cast<T>(gb[i]);
  }

  // Unshuffle is a permutation; its adjoint is the shuffle.
  ImageT<double> dact = pixel_shuffle(dfeat, net.config.unshuffle);

  for (int li = static_cast<int>(net.convs.size()) - 1; li >= 0; --li) {
    const auto& layer = net.convs[static_cast<size_t>(li)];
    const ImageT<T>& in = acts[static_cast<size_t>(li)];
    const ImageT<T>& out = acts[static_cast<size_t>(li) + 1];
    const int C = layer.in_channels, O = layer.out_channels, s = layer.stride;
    // ReLU mask.
    ImageT<double> dpre = dact;
    {
      auto d = dpre.values();
      auto a = out.values();
      for (size_t i = 0; i < d.size(); ++i)
        if (!(a[i] > T(0))) d[i] = 0.0;
    }
    auto& gl = grad.convs[static_cast<size_t>(li)];
    parallel_for(0, O, [&](int k) {
      double gb = 0.0;
      std::vector<double> gw(static_cast<size_t>(C) * 9, 0.0);
      for (int oy = 0; oy < out.height(); ++oy)
        for (int ox = 0; ox < out.width(); ++ox) {
          const double d = dpre.at(oy, ox, k);
          if (d == 0.0) continue;
          gb += d;
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = oy * s + ky - 1;
            if (iy < 0 || iy >= in.height()) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ox * s + kx - 1;
              if (ix < 0 || ix >= in.width()) continue;
              const T* p = in.pixel(iy, ix);
              for (int c = 0; c < C; ++c) gw[static_cast<size_t>(c) * 9 + ky * 3 + kx] += d * p[c];
            }
          }
        }
      gl.bias[static_cast<size_t>(k)] = static_cast<T>(gb);
      for (size_t i = 0; i < gw.size(); ++i) gl.weight[static_cast<size_t>(k) * C * 9 + i] = static_cast<T>(gw[i]);
    });
    if (li == 0) break;  // the image itself needs no gradient
    ImageT<double> din(in.height(), in.width(), C);
    parallel_for(0, in.height(), [&](int iy) {
      for (int ix = 0; ix < in.width(); ++ix) {
        double* di = din.pixel(iy, ix);
        for (int ky = 0; ky < 3; ++ky) {
          const int ny = iy + 1 - ky;
          if (ny < 0 || ny % s != 0 || ny / s >= out.height()) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int nx = ix + 1 - kx;
            if (nx < 0 || nx % s != 0 || nx / s >= out.width()) continue;
            const double* d = dpre.pixel(ny / s, nx / s);
            for (int k = 0; k < O; ++k) {
              if (d[k] == 0.0) continue;
              const T* w = layer.weight.data() + static_cast<size_t>(k) * C * 9 + ky * 3 + kx;
              for (int c = 0; c < C; ++c) di[c] += d[k] * w[static_cast<size_t>(c) * 9];
            }
          }
        }
      }
    });
    dact = std::move(din);
  }
  return grad;
}

ProducerPlan producer_plan_for_ratio(int ratio, int depth, int width) {
  ProducerPlan plan;
  plan.config.depth = depth;
  switch (ratio) {
    case 4:
      plan.downsample = 1;
      plan.config.convs = {{width, 1}, {width, 1}};
      break;
    case 8:
      plan.downsample = 2;
      plan.config.convs = {{width, 1}, {width, 1}};
      break;
    case 32:
      plan.downsample = 2;
      plan.config.convs = {{width, 2}, {width, 2}};
      break;
    default:
      throw ArgumentError("grid ratio must be 4, 8 or 32, got " + std::to_string(ratio));
  }
  return plan;
}

namespace {
constexpr const char* kProducerConfigEntry = "producer.config";
}

template <class T>
void append_producer(std::vector<TensorEntry>& out, ProducerNetT<T>& net) {
  const auto& c = net.config;
  TensorEntry cfg{kProducerConfigEntry, {}, {}};
  cfg.data = {static_cast<float>(c.in_channels), static_cast<float>(c.unshuffle), static_cast<float>(c.depth),
              static_cast<float>(c.convs.size())};
  for (const auto& s : c.convs) {
    cfg.data.push_back(static_cast<float>(s.out_channels));
    cfg.data.push_back(static_cast<float>(s.stride));
  }
  cfg.data.push_back(static_cast<float>(c.heads.size()));
  for (GridKind k : c.heads) cfg.data.push_back(static_cast<float>(static_cast<int>(k)));
  cfg.shape = {static_cast<std::uint32_t>(cfg.data.size())};
  out.push_back(std::move(cfg));
  append_entries(out, net.parameters());
}

bool has_producer(const std::vector<TensorEntry>& entries) {
  return find_tensor(entries, kProducerConfigEntry) != nullptr;
}

ProducerNet load_producer(const std::vector<TensorEntry>& entries) {
  const TensorEntry* cfg = find_tensor(entries, kProducerConfigEntry);
  if (!cfg) throw FormatError("tensor container has no producer");
  const auto& d = cfg->data;
  size_t i = 0;
  auto next = [&]() -> int {
    if (i >= d.size()) throw DecodeError("producer.config is truncated");
    return static_cast<int>(d[i++]);
  };
  ProducerConfig c;
  c.in_channels = next();
  c.unshuffle = next();
  c.depth = next();
  const int nconv = next();
  if (nconv < 0 || nconv > 64) throw DecodeError("producer.config: bad layer count");
  c.convs.clear();
  for (int k = 0; k < nconv; ++k) {
    const int w = next();
    const int s = next();
    c.convs.push_back({w, s});
  }
  const int nheads = next();
  if (nheads < 1 || nheads > 2) throw DecodeError("producer.config: bad head count");
  c.heads.clear();
  for (int k = 0; k < nheads; ++k) {
    const int kind = next();
    if (kind < 0 || kind > 2) throw DecodeError("producer.config: bad head kind");
    c.heads.push_back(static_cast<GridKind>(kind));
  }
  ProducerNet net = ProducerNet::create(c, 0);
  assign_entries(net.parameters(), entries);
  return net;
}

#define BPAM_INSTANTIATE(T)                                                                                \
  template struct ProducerNetT<T>;                                                                         \
  template std::vector<BilateralGridT<T>> produce_grids(const ProducerNetT<T>&, const ImageT<T>&,           \
                                                        const GridGeometry&);                              \
  template ProducerNetT<T> producer_backward(const ProducerNetT<T>&, const ImageT<T>&, const GridGeometry&, \
                                             const std::vector<BilateralGridT<T>>&);                       \
  template void append_producer(std::vector<TensorEntry>&, ProducerNetT<T>&);                              \
  template std::vector<ImageT<T>> conv_stack(const ProducerNetT<T>&, const ImageT<T>&);

BPAM_INSTANTIATE(float)
BPAM_INSTANTIATE(double)
#undef BPAM_INSTANTIATE

}  // namespace bpam
