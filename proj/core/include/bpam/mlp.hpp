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
#include <span>

#include "bpam/layout.hpp"

namespace bpam {

template <class T>
using Color = std::array<T, kColorChannels>;
template <class T>
using Hidden = std::array<T, kHiddenUnits>;

// Per-pixel parameters of the 3-8-3 MLP.
template <class T>
struct PixelMlpParams {
  std::array<T, kHiddenUnits * kColorChannels> w1{};  // row-major 8x3
  Hidden<T> b1{};
  std::array<T, kColorChannels * kHiddenUnits> w2{};  // row-major 3x8
  Color<T> b2{};

  // From sliced stage-1 (32) and stage-2 (27) slot vectors.
  static PixelMlpParams from_slots(std::span<const T> stage1, std::span<const T> stage2) {
    PixelMlpParams p;
    std::copy_n(stage1.begin(), p.w1.size(), p.w1.begin());
    std::copy_n(stage1.begin() + b1_slot(0), p.b1.size(), p.b1.begin());
    std::copy_n(stage2.begin(), p.w2.size(), p.w2.begin());
    std::copy_n(stage2.begin() + b2_slot(0), p.b2.size(), p.b2.begin());
    return p;
  }
};

// Per-pixel affine color transform O = alpha * I + beta.
template <class T>
struct AffineParams {
  std::array<T, 9> alpha{};  // row-major 3x3
  Color<T> beta{};

  static AffineParams from_slots(std::span<const T> slots) {
    AffineParams p;
    for (int o = 0; o < kColorChannels; ++o) {
      for (int c = 0; c < kColorChannels; ++c) p.alpha[o * 3 + c] = slots[alpha_slot(o, c)];
      p.beta[o] = slots[beta_slot(o)];
    }
    return p;
  }
};

template <class T>
Color<T> apply_affine(const AffineParams<T>& p, const Color<T>& in) {
  Color<T> out;
  for (int o = 0; o < kColorChannels; ++o) {
    T s = p.beta[o];
    for (int c = 0; c < kColorChannels; ++c) s += p.alpha[o * 3 + c] * in[c];
    out[o] = s;
  }
  return out;
}

// Pre-activation W1 * I + b1; `w1` is row-major 8x3.
template <class T>
Hidden<T> mlp_stage1_linear(std::span<const T> w1, std::span<const T> b1, const Color<T>& in) {
  Hidden<T> pre;
  for (int h = 0; h < kHiddenUnits; ++h) {
    T s = b1[h];
    for (int c = 0; c < kColorChannels; ++c) s += w1[w1_slot(h, c)] * in[c];
    pre[h] = s;
  }
  return pre;
}

// z = max(0, W1 * I + b1).
template <class T>
Hidden<T> mlp_stage1(std::span<const T> w1, std::span<const T> b1, const Color<T>& in) {
  Hidden<T> z = mlp_stage1_linear(w1, b1, in);
  for (T& v : z) v = v > T(0) ? v : T(0);
  return z;
}

// O = W2 * z + b2; `w2` is row-major 3x8.
template <class T>
Color<T> mlp_stage2(std::span<const T> w2, std::span<const T> b2, const Hidden<T>& z) {
  Color<T> out;
  for (int o = 0; o < kColorChannels; ++o) {
    T s = b2[o];
    for (int h = 0; h < kHiddenUnits; ++h) s += w2[w2_slot(o, h)] * z[h];
    out[o] = s;
  }
  return out;
}

}  // namespace bpam
