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

#include "bpam/containers.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bpam/atomic_file.hpp"

namespace bpam {
namespace {

class ByteWriter {
 public:
  void magic(std::string_view m) { buf_.append(m); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { buf_.append(s); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string_view bytes, const char* what) : bytes_(bytes), what_(what) {}

  void expect_magic(std::string_view m) {
    if (take(m.size()) != m) throw DecodeError(std::string(what_) + ": bad magic");
  }
  std::uint32_t u32() {
    const auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[static_cast<size_t>(i)])) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view take(size_t n) {
    if (n > bytes_.size() - pos_) throw DecodeError(std::string(what_) + ": truncated data");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  size_t pos_ = 0;
  const char* what_;
};

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_grids(const std::vector<BilateralGrid>& grids) {
  ByteWriter w;
  w.magic(kGridMagic);
  w.u32(kGridVersion);
  w.u32(static_cast<std::uint32_t>(grids.size()));
  for (const auto& g : grids) {
    const auto& geom = g.geometry();
    for (int v : {geom.grid_h, geom.grid_w, geom.depth, g.params(), geom.align_centers ? 1 : 0, geom.image_h,
                  geom.image_w})
      w.u32(static_cast<std::uint32_t>(v));
    for (float v : g.values()) w.f32(v);
  }
  return w.take();
}

std::vector<BilateralGrid> decode_grids(std::string_view bytes) {
  ByteReader r(bytes, "grid container");
  r.expect_magic(kGridMagic);
  const auto version = r.u32();
  if (version != kGridVersion) throw FormatError("grid container version " + std::to_string(version) + " unsupported");
  const auto count = r.u32();
  std::vector<BilateralGrid> grids;
  for (std::uint32_t i = 0; i < count; ++i) {
    GridGeometry geom;
    geom.grid_h = static_cast<int>(r.u32());
    geom.grid_w = static_cast<int>(r.u32());
    geom.depth = static_cast<int>(r.u32());
    const auto params = r.u32();
    const auto align = r.u32();
    geom.image_h = static_cast<int>(r.u32());
    geom.image_w = static_cast<int>(r.u32());
    if (align > 1) throw DecodeError("grid container: bad align flag");
    geom.align_centers = align == 1;
    const std::uint64_t n = static_cast<std::uint64_t>(geom.grid_h) * geom.grid_w * geom.depth * params;
    if (n * 4 > r.remaining()) throw DecodeError("grid container: truncated cell data");
    try {
      BilateralGrid g(geom, static_cast<int>(params));
      for (float& v : g.values()) v = r.f32();
      grids.push_back(std::move(g));
    } catch (const ArgumentError& e) {
      throw DecodeError(std::string("grid container: ") + e.what());
    }
  }
  if (r.remaining() != 0) throw DecodeError("grid container: trailing bytes");
  return grids;
}

void save_grids(const std::vector<BilateralGrid>& grids, const std::filesystem::path& path) {
  write_file_atomic(path, encode_grids(grids));
}

std::vector<BilateralGrid> load_grids(const std::filesystem::path& path) { return decode_grids(read_file(path)); }

std::string encode_tensors(const std::vector<TensorEntry>& entries) {
  ByteWriter w;
  w.magic(kTensorMagic);
  w.u32(kTensorVersion);
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    std::uint64_t n = 1;
    for (auto d : e.shape) n *= d;
    if (n != e.data.size()) throw ArgumentError("tensor '" + e.name + "': shape does not match data size");
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.bytes(e.name);
    w.u32(static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) w.u32(d);
    for (float v : e.data) w.f32(v);
  }
  return w.take();
}

std::vector<TensorEntry> decode_tensors(std::string_view bytes) {
  ByteReader r(bytes, "tensor container");
  r.expect_magic(kTensorMagic);
  const auto version = r.u32();
  if (version != kTensorVersion)
    throw FormatError("tensor container version " + std::to_string(version) + " unsupported");
  const auto count = r.u32();
  std::vector<TensorEntry> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorEntry e;
    const auto len = r.u32();
    e.name = std::string(r.take(len));
    const auto ndim = r.u32();
    if (ndim > 8) throw DecodeError("tensor container: implausible rank for '" + e.name + "'");
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      e.shape.push_back(r.u32());
      n *= e.shape.back();
    }
    if (n * 4 > r.remaining()) throw DecodeError("tensor container: truncated data for '" + e.name + "'");
    e.data.resize(n);
    for (auto& v : e.data) v = r.f32();
    entries.push_back(std::move(e));
  }
  if (r.remaining() != 0) throw DecodeError("tensor container: trailing bytes");
  return entries;
}

void save_tensors(const std::vector<TensorEntry>& entries, const std::filesystem::path& path) {
  write_file_atomic(path, encode_tensors(entries));
}

std::vector<TensorEntry> load_tensors(const std::filesystem::path& path) { return decode_tensors(read_file(path)); }

const TensorEntry* find_tensor(const std::vector<TensorEntry>& entries, std::string_view name) {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace bpam
