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
#include <cstddef>
#include <span>
#include <vector>

#include "bpam/errors.hpp"

namespace bpam {

// Height x width x channels array, row-major with interleaved channels.
// Used for images in [0, 1] as well as for every intermediate per-pixel map
// (guidance, sliced parameters, hidden activations, gradients).
template <class T>
class ImageT {
 public:
  using value_type = T;

  ImageT() = default;
  ImageT(int height, int width, int channels, T fill = T(0))
      : height_(height), width_(width), channels_(channels) {
    if (height < 0 || width < 0 || channels < 0)
      throw ArgumentError("image dimensions must be non-negative");
    data_.assign(static_cast<size_t>(height) * width * channels, fill);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  size_t size() const { return data_.size(); }
  size_t pixel_count() const { return static_cast<size_t>(height_) * width_; }
  bool empty() const { return data_.empty(); }

  bool same_shape(const ImageT& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }
  template <class U>
  bool same_shape(const ImageT<U>& o) const {
    return height_ == o.height() && width_ == o.width() && channels_ == o.channels();
  }

  size_t offset(int y, int x, int c = 0) const {
    return (static_cast<size_t>(y) * width_ + x) * channels_ + c;
  }
  T& at(int y, int x, int c = 0) { return data_[offset(y, x, c)]; }
  const T& at(int y, int x, int c = 0) const { return data_[offset(y, x, c)]; }

  T* pixel(int y, int x) { return data_.data() + offset(y, x); }
  const T* pixel(int y, int x) const { return data_.data() + offset(y, x); }

  std::span<T> row(int y) {
    return {data_.data() + offset(y, 0), static_cast<size_t>(width_) * channels_};
  }
  std::span<const T> row(int y) const {
    return {data_.data() + offset(y, 0), static_cast<size_t>(width_) * channels_};
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const ImageT&, const ImageT&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using Image = ImageT<float>;
using ImageD = ImageT<double>;

template <class To, class From>
ImageT<To> image_cast(const ImageT<From>& src) {
  ImageT<To> out(src.height(), src.width(), src.channels());
  auto d = out.values();
  auto s = src.values();
  for (size_t i = 0; i < s.size(); ++i) d[i] = static_cast<To>(s[i]);
  return out;
}

// True when every value is finite and inside [0, 1].
template <class T>
bool is_unit_range(const ImageT<T>& img) {
  for (T v : img.values())
    if (!(v >= T(0) && v <= T(1))) return false;
  return true;
}

// Single channel `c` of `img` as an H x W x 1 map.
template <class T>
ImageT<T> extract_channel(const ImageT<T>& img, int c) {
  if (c < 0 || c >= img.channels()) throw ArgumentError("channel index out of range");
  ImageT<T> out(img.height(), img.width(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(y, x) = img.at(y, x, c);
  return out;
}

}  // namespace bpam
