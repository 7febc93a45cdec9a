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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bpam/grid.hpp"
#include "bpam/params.hpp"

namespace bpam {

// Grid container ("BPG1"):
//   "BPG1" | u32 version=1 | u32 grid_count |
//   per grid: u32 grid_h, grid_w, depth, P, align_flag, image_h, image_w |
//             f32 cells[grid_h * grid_w * depth * P] in [y][x][z][p] order
// All integers and floats little-endian.
inline constexpr std::string_view kGridMagic = "BPG1";
inline constexpr std::uint32_t kGridVersion = 1;

std::string encode_grids(const std::vector<BilateralGrid>& grids);
std::vector<BilateralGrid> decode_grids(std::string_view bytes);
void save_grids(const std::vector<BilateralGrid>& grids, const std::filesystem::path& path);
std::vector<BilateralGrid> load_grids(const std::filesystem::path& path);

// Tensor container ("BPT1"):
//   "BPT1" | u32 version=1 | u32 entry_count |
//   per entry: u32 name_len | utf-8 name | u32 ndim | u32 dims[ndim] |
//              f32 data[prod(dims)]
inline constexpr std::string_view kTensorMagic = "BPT1";
inline constexpr std::uint32_t kTensorVersion = 1;

struct TensorEntry {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  friend bool operator==(const TensorEntry&, const TensorEntry&) = default;
};

std::string encode_tensors(const std::vector<TensorEntry>& entries);
std::vector<TensorEntry> decode_tensors(std::string_view bytes);
void save_tensors(const std::vector<TensorEntry>& entries, const std::filesystem::path& path);
std::vector<TensorEntry> load_tensors(const std::filesystem::path& path);

const TensorEntry* find_tensor(const std::vector<TensorEntry>& entries, std::string_view name);

template <class T>
void append_entries(std::vector<TensorEntry>& out, const ParamList<T>& params) {
  for (const auto& p : params) {
    TensorEntry e{p.name, p.shape, {}};
    e.data.reserve(p.values.size());
    for (T v : p.values) e.data.push_back(static_cast<float>(v));
    out.push_back(std::move(e));
  }
}

// Copies entries into matching parameters by name. Shapes must agree;
// missing names raise FormatError.
template <class T>
void assign_entries(const ParamList<T>& params, const std::vector<TensorEntry>& entries) {
  for (const auto& p : params) {
    const TensorEntry* e = find_tensor(entries, p.name);
    if (!e) throw FormatError("tensor container is missing entry '" + p.name + "'");
    if (e->shape != p.shape || e->data.size() != p.values.size())
      throw FormatError("tensor '" + p.name + "' has an unexpected shape");
    for (size_t i = 0; i < e->data.size(); ++i) p.values[i] = static_cast<T>(e->data[i]);
  }
}

std::string read_file(const std::filesystem::path& path);

}  // namespace bpam
