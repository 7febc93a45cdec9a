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

#include <array>
#include <span>
#include <vector>

namespace bpam {

// Fixed 3-8-3 per-pixel MLP.
inline constexpr int kColorChannels = 3;
inline constexpr int kHiddenUnits = 8;

// Per-cell parameter slots.
//   stage 1: [W1 row-major (8x3), b1 (8)]          -> 32
//   stage 2: [W2 row-major (3x8), b2 (3)]          -> 27
//   affine:  [alpha row o (3), beta o] for o=0..2   -> 12
inline constexpr int kStage1Params = kHiddenUnits * kColorChannels + kHiddenUnits;
inline constexpr int kStage2Params = kColorChannels * kHiddenUnits + kColorChannels;
inline constexpr int kAffineParams = kColorChannels * (kColorChannels + 1);

static_assert(kStage1Params == 32);
static_assert(kStage2Params == 27);
static_assert(kAffineParams == 12);

constexpr int w1_slot(int hidden, int color) { return hidden * kColorChannels + color; }
constexpr int b1_slot(int hidden) { return kHiddenUnits * kColorChannels + hidden; }
constexpr int w2_slot(int color, int hidden) { return color * kHiddenUnits + hidden; }
constexpr int b2_slot(int color) { return kColorChannels * kHiddenUnits + color; }
constexpr int alpha_slot(int row, int col) { return row * (kColorChannels + 1) + col; }
constexpr int beta_slot(int row) { return row * (kColorChannels + 1) + kColorChannels; }

// Which parameter set a grid carries.
enum class GridKind { kStage1, kStage2, kAffine };

int params_per_cell(GridKind kind);

// Subgrid partition of the slots of `kind`. Stage 1 yields 3 weight subgrids
// (W1[:, c], ordered by hidden unit) plus the b1 subgrid; stage 2 yields 8
// weight subgrids (W2[:, h]) plus the b2 subgrid; affine yields one subgrid
// per output row holding that row of alpha and its beta.
const std::vector<std::vector<int>>& subgrid_slots(GridKind kind);

// Slot -> guidance channel. Decomposed routing sends every slot to the channel
// of its subgrid; monolithic routing sends everything to channel 0.
struct SlotRouting {
  int channels = 1;
  std::vector<int> slot_channel;

  static SlotRouting monolithic(int params);
  static SlotRouting decomposed(GridKind kind);
};

// Cell contents whose sliced parameters make the corresponding stage an
// identity map on colors in [0, 1].
std::vector<double> identity_cell(GridKind kind);

}  // namespace bpam
