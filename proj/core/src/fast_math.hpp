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

#include <bit>
#include <cstdint>
#include <limits>

namespace bpam::detail {

// exp(x) for float, branch-free so loops over it vectorize. Cody-Waite range
// reduction plus a degree-6 polynomial; relative error below 2e-7 on
// [-87, 88].
inline float fast_exp(float x) {
  x = x < -87.0f ? -87.0f : x;
  x = x > 88.0f ? 88.0f : x;
  // Adding 1.5 * 2^23 rounds to the nearest integer in the low mantissa bits.
  constexpr float kShift = 12582912.0f;
  const float n = (x * 1.44269504088896341f + kShift) - kShift;
  float r = x - n * 0.693145751953125f;
  r -= n * 1.428606765330187045e-06f;
  float p = 1.0f / 720.0f;
  p = p * r + 1.0f / 120.0f;
  p = p * r + 1.0f / 24.0f;
  p = p * r + 1.0f / 6.0f;
  p = p * r + 0.5f;
  p = p * r + 1.0f;
  p = p * r + 1.0f;
  const std::int32_t e = (static_cast<std::int32_t>(n) + 127) << 23;
  return p * std::bit_cast<float>(e);
}

inline float fast_sigmoid(float a) {
  constexpr float kLo = std::numeric_limits<float>::min();
  constexpr float kHi = 1.0f - std::numeric_limits<float>::epsilon() / 2;
  float g = 1.0f / (1.0f + fast_exp(-a));
  g = g < kLo ? kLo : g;
  return g > kHi ? kHi : g;
}

}  // namespace bpam::detail
