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

#include "bpam/layout.hpp"

#include "bpam/errors.hpp"

namespace bpam {

int params_per_cell(GridKind kind) {
  switch (kind) {
    case GridKind::kStage1: return kStage1Params;
    case GridKind::kStage2: return kStage2Params;
    case GridKind::kAffine: return kAffineParams;
  }
  throw ArgumentError("unknown grid kind");
}

namespace {

std::vector<std::vector<int>> make_partition(GridKind kind) {
  std::vector<std::vector<int>> parts;
  switch (kind) {
    case GridKind::kStage1:
      for (int c = 0; c < kColorChannels; ++c) {
        auto& s = parts.emplace_back();
        for (int h = 0; h < kHiddenUnits; ++h) s.push_back(w1_slot(h, c));
      }
      {
        auto& s = parts.emplace_back();
        for (int h = 0; h < kHiddenUnits; ++h) s.push_back(b1_slot(h));
      }
      break;
    case GridKind::kStage2:
      for (int h = 0; h < kHiddenUnits; ++h) {
        auto& s = parts.emplace_back();
        for (int o = 0; o < kColorChannels; ++o) s.push_back(w2_slot(o, h));
      }
      {
        auto& s = parts.emplace_back();
        for (int o = 0; o < kColorChannels; ++o) s.push_back(b2_slot(o));
      }
      break;
    case GridKind::kAffine:
      for (int o = 0; o < kColorChannels; ++o) {
        auto& s = parts.emplace_back();
        for (int c = 0; c < kColorChannels; ++c) s.push_back(alpha_slot(o, c));
        s.push_back(beta_slot(o));
      }
      break;
  }
  return parts;
}

}  // namespace

const std::vector<std::vector<int>>& subgrid_slots(GridKind kind) {
  static const std::array<std::vector<std::vector<int>>, 3> table = {
      make_partition(GridKind::kStage1), make_partition(GridKind::kStage2), make_partition(GridKind::kAffine)};
  return table[static_cast<size_t>(kind)];
}

SlotRouting SlotRouting::monolithic(int params) {
  if (params <= 0) throw ArgumentError("parameter count must be positive");
  return {1, std::vector<int>(static_cast<size_t>(params), 0)};
}

SlotRouting SlotRouting::decomposed(GridKind kind) {
  const auto& parts = subgrid_slots(kind);
  SlotRouting r;
  r.channels = static_cast<int>(parts.size());
  r.slot_channel.assign(static_cast<size_t>(params_per_cell(kind)), -1);
  for (size_t k = 0; k < parts.size(); ++k)
    for (int slot : parts[k]) r.slot_channel[static_cast<size_t>(slot)] = static_cast<int>(k);
  return r;
}

std::vector<double> identity_cell(GridKind kind) {
  std::vector<double> cell(static_cast<size_t>(params_per_cell(kind)), 0.0);
  for (int c = 0; c < kColorChannels; ++c) {
    switch (kind) {
      case GridKind::kStage1: cell[w1_slot(c, c)] = 1.0; break;
      case GridKind::kStage2: cell[w2_slot(c, c)] = 1.0; break;
      case GridKind::kAffine: cell[alpha_slot(c, c)] = 1.0; break;
    }
  }
  return cell;
}

}  // namespace bpam
