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

#include "bpam/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bpam/parallel.hpp"

namespace bpam {
namespace {

// Logistic function kept strictly inside (0, 1) even where float rounding
// would saturate it.
template <class T>
inline T sigmoid(T a) {
  const T g = T(1) / (T(1) + std::exp(-a));
  return std::clamp(g, std::numeric_limits<T>::min(), T(1) - std::numeric_limits<T>::epsilon() / 2);
}

template <class T>
void check_net(const GuidanceNetT<T>& net) {
  if (net.in_channels < 1 || net.hidden < 1 || net.out_channels < 1)
    throw ArgumentError("guidance net dimensions must be positive");
  if (net.w1.size() != static_cast<size_t>(net.hidden) * net.in_channels ||
      net.b1.size() != static_cast<size_t>(net.hidden) ||
      net.w2.size() != static_cast<size_t>(net.out_channels) * net.hidden ||
      net.b2.size() != static_cast<size_t>(net.out_channels))
    throw ArgumentError("guidance net parameter sizes are inconsistent");
}

}  // namespace

template <class T>
GuidanceNetT<T> GuidanceNetT<T>::zeros(int in_channels, int out_channels, int hidden) {
  GuidanceNetT n;
  n.in_channels = in_channels;
  n.hidden = hidden;
  n.out_channels = out_channels;
  n.w1.assign(static_cast<size_t>(hidden) * in_channels, T(0));
  n.b1.assign(static_cast<size_t>(hidden), T(0));
  n.w2.assign(static_cast<size_t>(out_channels) * hidden, T(0));
  n.b2.assign(static_cast<size_t>(out_channels), T(0));
  check_net(n);
  return n;
}

template <class T>
GuidanceNetT<T> GuidanceNetT<T>::create(int in_channels, int out_channels, std::uint64_t seed, int hidden) {
  GuidanceNetT n = zeros(in_channels, out_channels, hidden);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Gram-Schmidt over the shorter side of the hidden x in matrix.
  const bool by_cols = in_channels <= hidden;
  const int vecs = by_cols ? in_channels : hidden;
  const int len = by_cols ? hidden : in_channels;
  std::vector<std::vector<double>> basis;
  for (int i = 0; i < vecs; ++i) {
    std::vector<double> v(static_cast<size_t>(len));
    for (auto& e : v) e = normal(rng);
    for (const auto& b : basis) {
      double d = 0.0;
      for (int k = 0; k < len; ++k) d += v[static_cast<size_t>(k)] * b[static_cast<size_t>(k)];
      for (int k = 0; k < len; ++k) v[static_cast<size_t>(k)] -= d * b[static_cast<size_t>(k)];
    }
    double norm = 0.0;
    for (double e : v) norm += e * e;
    norm = std::sqrt(norm);
    for (auto& e : v) e /= norm;
    basis.push_back(std::move(v));
  }
  for (int h = 0; h < hidden; ++h)
    for (int c = 0; c < in_channels; ++c) {
      const double e = by_cols ? basis[static_cast<size_t>(c)][static_cast<size_t>(h)]
                               : basis[static_cast<size_t>(h)][static_cast<size_t>(c)];
      n.w1[static_cast<size_t>(h) * in_channels + c] = static_cast<T>(0.1 * e);
    }
  return n;
}

template <class T>
ParamList<T> GuidanceNetT<T>::parameters(const std::string& prefix) {
  using u32 = std::uint32_t;
  return {
      {prefix + ".w1", {static_cast<u32>(hidden), static_cast<u32>(in_channels)}, w1},
      {prefix + ".b1", {static_cast<u32>(hidden)}, b1},
      {prefix + ".w2", {static_cast<u32>(out_channels), static_cast<u32>(hidden)}, w2},
      {prefix + ".b2", {static_cast<u32>(out_channels)}, b2},
  };
}

template <class T>
ImageT<T> guidance_forward(const GuidanceNetT<T>& net, const ImageT<T>& input) {
  check_net(net);
  if (input.channels() != net.in_channels)
    throw ArgumentError("guidance_forward: input has " + std::to_string(input.channels()) +
                        " channels, net expects " + std::to_string(net.in_channels));
  ImageT<T> out(input.height(), input.width(), net.out_channels);
  const int C = net.in_channels, H = net.hidden, K = net.out_channels;
  parallel_for(0, input.height(), [&](int y) {
    std::vector<T> h(static_cast<size_t>(H));
    for (int x = 0; x < input.width(); ++x) {
      const T* in = input.pixel(y, x);
      for (int j = 0; j < H; ++j) {
        T s = net.b1[static_cast<size_t>(j)];
        for (int c = 0; c < C; ++c) s += net.w1[static_cast<size_t>(j) * C + c] * in[c];
        h[static_cast<size_t>(j)] = s > T(0) ? s : T(0);
      }
      T* o = out.pixel(y, x);
      for (int k = 0; k < K; ++k) {
        T s = net.b2[static_cast<size_t>(k)];
        for (int j = 0; j < H; ++j) s += net.w2[static_cast<size_t>(k) * H + j] * h[static_cast<size_t>(j)];
        o[k] = sigmoid(s);
      }
    }
  });
  return out;
}

template <class T>
GuidanceGradients<T> guidance_backward(const GuidanceNetT<T>& net, const ImageT<T>& input, const ImageT<T>& upstream,
                                       bool want_input_grad) {
  check_net(net);
  if (input.channels() != net.in_channels)
    throw ArgumentError("guidance_backward: input channel count does not match the net");
  if (upstream.height() != input.height() || upstream.width() != input.width() ||
      upstream.channels() != net.out_channels)
    throw ArgumentError("guidance_backward: upstream gradient shape does not match the forward output");

  const int C = net.in_channels, H = net.hidden, K = net.out_channels;
  GuidanceGradients<T> grads{net.zeros_like(), {}};
  if (want_input_grad) grads.input = ImageT<T>(input.height(), input.width(), C);

  const size_t nparams = net.w1.size() + net.b1.size() + net.w2.size() + net.b2.size();
  const auto chunks = split_rows(input.height());
  std::vector<std::vector<double>> acc(chunks.size());

  parallel_chunks(chunks, [&](int ci, RowRange range) {
    auto& a = acc[static_cast<size_t>(ci)];
    a.assign(nparams, 0.0);
    double* gw1 = a.data();
    double* gb1 = gw1 + net.w1.size();
    double* gw2 = gb1 + net.b1.size();
    double* gb2 = gw2 + net.w2.size();
    std::vector<double> pre(static_cast<size_t>(H)), hid(static_cast<size_t>(H)), dh(static_cast<size_t>(H));
    std::vector<double> da(static_cast<size_t>(K));
    for (int y = range.begin; y < range.end; ++y)
      for (int x = 0; x < input.width(); ++x) {
        const T* in = input.pixel(y, x);
        for (int j = 0; j < H; ++j) {
          double s = net.b1[static_cast<size_t>(j)];
          for (int c = 0; c < C; ++c) s += static_cast<double>(net.w1[static_cast<size_t>(j) * C + c]) * in[c];
          pre[static_cast<size_t>(j)] = s;
          hid[static_cast<size_t>(j)] = s > 0.0 ? s : 0.0;
        }
        const T* up = upstream.pixel(y, x);
        for (int k = 0; k < K; ++k) {
          double s = net.b2[static_cast<size_t>(k)];
          for (int j = 0; j < H; ++j)
            s += static_cast<double>(net.w2[static_cast<size_t>(k) * H + j]) * hid[static_cast<size_t>(j)];
          const double g = 1.0 / (1.0 + std::exp(-s));
          da[static_cast<size_t>(k)] = static_cast<double>(up[k]) * g * (1.0 - g);
        }
        std::fill(dh.begin(), dh.end(), 0.0);
        for (int k = 0; k < K; ++k) {
          const double d = da[static_cast<size_t>(k)];
          gb2[k] += d;
          for (int j = 0; j < H; ++j) {
            gw2[static_cast<size_t>(k) * H + j] += d * hid[static_cast<size_t>(j)];
            dh[static_cast<size_t>(j)] += d * static_cast<double>(net.w2[static_cast<size_t>(k) * H + j]);
          }
        }
        T* gin = want_input_grad ? grads.input.pixel(y, x) : nullptr;
        if (gin)
          for (int c = 0; c < C; ++c) gin[c] = T(0);
        for (int j = 0; j < H; ++j) {
          if (!(pre[static_cast<size_t>(j)] > 0.0)) continue;
          const double d = dh[static_cast<size_t>(j)];
          gb1[j] += d;
          for (int c = 0; c < C; ++c) {
            gw1[static_cast<size_t>(j) * C + c] += d * in[c];
            if (gin) gin[c] += static_cast<T>(d * static_cast<double>(net.w1[static_cast<size_t>(j) * C + c]));
          }
        }
      }
  });

  std::vector<T>* outs[4] = {&grads.net.w1, &grads.net.b1, &grads.net.w2, &grads.net.b2};
  size_t off = 0;
  for (auto* v : outs) {
    for (size_t i = 0; i < v->size(); ++i) {
      double s = 0.0;
      for (const auto& a : acc) s += a[off + i];
      (*v)[i] = static_cast<T>(s);
    }
    off += v->size();
  }
  return grads;
}

template struct GuidanceNetT<float>;
template struct GuidanceNetT<double>;
template ImageT<float> guidance_forward(const GuidanceNetT<float>&, const ImageT<float>&);
template ImageT<double> guidance_forward(const GuidanceNetT<double>&, const ImageT<double>&);
template GuidanceGradients<float> guidance_backward(const GuidanceNetT<float>&, const ImageT<float>&,
                                                    const ImageT<float>&, bool);
template GuidanceGradients<double> guidance_backward(const GuidanceNetT<double>&, const ImageT<double>&,
                                                     const ImageT<double>&, bool);

}  // namespace bpam
