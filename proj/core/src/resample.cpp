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

#include "bpam/resample.hpp"

#include <string>

#include "bpam/parallel.hpp"

namespace bpam {

template <class T>
ImageT<T> downsample(const ImageT<T>& img, int factor) {
  if (factor <= 0) throw ArgumentError("downsample factor must be positive, got " + std::to_string(factor));
  if (factor == 1) return img;
  const int oh = (img.height() + factor - 1) / factor;
  const int ow = (img.width() + factor - 1) / factor;
  const int ch = img.channels();
  ImageT<T> out(oh, ow, ch);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  parallel_for(0, oh, [&](int oy) {
    std::vector<double> acc(static_cast<size_t>(ch));
    for (int ox = 0; ox < ow; ++ox) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int dy = 0; dy < factor; ++dy) {
        const int sy = std::min(oy * factor + dy, img.height() - 1);
        for (int dx = 0; dx < factor; ++dx) {
          const int sx = std::min(ox * factor + dx, img.width() - 1);
          const T* p = img.pixel(sy, sx);
          for (int c = 0; c < ch; ++c) acc[static_cast<size_t>(c)] += p[c];
        }
      }
      T* o = out.pixel(oy, ox);
      for (int c = 0; c < ch; ++c) o[c] = static_cast<T>(acc[static_cast<size_t>(c)] * inv);
    }
  });
  return out;
}

namespace {
void check_divisible(int h, int w, int factor, const char* op) {
  if (factor <= 0) throw ArgumentError(std::string(op) + ": factor must be positive");
  if (h % factor != 0 || w % factor != 0)
    throw ArgumentError(std::string(op) + ": " + std::to_string(h) + "x" + std::to_string(w) +
                        " is not divisible by " + std::to_string(factor));
}
}  // namespace

template <class T>
ImageT<T> pixel_unshuffle(const ImageT<T>& feat, int factor) {
  check_divisible(feat.height(), feat.width(), factor, "pixel_unshuffle");
  const int f2 = factor * factor;
  ImageT<T> out(feat.height() / factor, feat.width() / factor, feat.channels() * f2);
  for (int y = 0; y < feat.height(); ++y)
    for (int x = 0; x < feat.width(); ++x) {
      const int oc = (y % factor) * factor + (x % factor);
      const T* src = feat.pixel(y, x);
      T* dst = out.pixel(y / factor, x / factor);
      for (int c = 0; c < feat.channels(); ++c) dst[c * f2 + oc] = src[c];
    }
  return out;
}

template <class T>
ImageT<T> pixel_shuffle(const ImageT<T>& feat, int factor) {
  if (factor <= 0) throw ArgumentError("pixel_shuffle: factor must be positive");
  const int f2 = factor * factor;
  if (feat.channels() % f2 != 0)
    throw ArgumentError("pixel_shuffle: channel count " + std::to_string(feat.channels()) +
                        " is not a multiple of " + std::to_string(f2));
  const int ch = feat.channels() / f2;
  ImageT<T> out(feat.height() * factor, feat.width() * factor, ch);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      const int ic = (y % factor) * factor + (x % factor);
      const T* src = feat.pixel(y / factor, x / factor);
      T* dst = out.pixel(y, x);
      for (int c = 0; c < ch; ++c) dst[c] = src[c * f2 + ic];
    }
  return out;
}

template ImageT<float> downsample(const ImageT<float>&, int);
template ImageT<double> downsample(const ImageT<double>&, int);
template ImageT<float> pixel_unshuffle(const ImageT<float>&, int);
template ImageT<double> pixel_unshuffle(const ImageT<double>&, int);
template ImageT<float> pixel_shuffle(const ImageT<float>&, int);
template ImageT<double> pixel_shuffle(const ImageT<double>&, int);

}  // namespace bpam
