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

#include "bpam/image.hpp"
#include "bpam/params.hpp"

namespace bpam {

// Pointwise guidance network in -> hidden -> out:
//   g = sigmoid(w2 * relu(w1 * x + b1) + b2)
// Every output lies strictly inside (0, 1).
template <class T>
struct GuidanceNetT {
  int in_channels = 0;
  int hidden = 0;
  int out_channels = 0;
  std::vector<T> w1;  // hidden x in, row-major
  std::vector<T> b1;  // hidden
  std::vector<T> w2;  // out x hidden, row-major
  std::vector<T> b2;  // out

  static constexpr int kDefaultHidden = 16;

  static GuidanceNetT zeros(int in_channels, int out_channels, int hidden = kDefaultHidden);

  // Seeded initialization: first layer has orthonormal columns (rows when
  // in > hidden) scaled by 0.1, second layer and biases are zero, so the
  // initial guidance is 0.5 everywhere.
  static GuidanceNetT create(int in_channels, int out_channels, std::uint64_t seed, int hidden = kDefaultHidden);

  GuidanceNetT zeros_like() const { return zeros(in_channels, out_channels, hidden); }

  ParamList<T> parameters(const std::string& prefix);

  friend bool operator==(const GuidanceNetT&, const GuidanceNetT&) = default;
};

using GuidanceNet = GuidanceNetT<float>;
using GuidanceNetD = GuidanceNetT<double>;

template <class To, class From>
GuidanceNetT<To> net_cast(const GuidanceNetT<From>& n) {
  GuidanceNetT<To> o;
  o.in_channels = n.in_channels;
  o.hidden = n.hidden;
  o.out_channels = n.out_channels;
  o.w1.assign(n.w1.begin(), n.w1.end());
  o.b1.assign(n.b1.begin(), n.b1.end());
  o.w2.assign(n.w2.begin(), n.w2.end());
  o.b2.assign(n.b2.begin(), n.b2.end());
  return o;
}

template <class T>
ImageT<T> guidance_forward(const GuidanceNetT<T>& net, const ImageT<T>& input);

template <class T>
struct GuidanceGradients {
  GuidanceNetT<T> net;
  ImageT<T> input;  // empty unless requested
};

template <class T>
GuidanceGradients<T> guidance_backward(const GuidanceNetT<T>& net, const ImageT<T>& input, const ImageT<T>& upstream,
                                       bool want_input_grad = true);

}  // namespace bpam
