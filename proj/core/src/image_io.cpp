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

#include "bpam/image_io.hpp"

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "bpam/atomic_file.hpp"

namespace bpam {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp; the message is captured here so it
// can be rethrown once control is back in C++ land.
struct PngErrorSink {
  char message[256] = {0};
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  if (sink) std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace

unsigned quantize(float v, int bit_depth) {
  const double maxv = bit_depth == 16 ? 65535.0 : 255.0;
  const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<unsigned>(std::floor(c * maxv + 0.5));
}

Image load_image(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw DecodeError(path.string() + ": not a PNG file");

  PngErrorSink sink;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_fn, png_warning_fn);
  if (!png) throw DecodeError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DecodeError("png_create_info_struct failed");
  }

  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  std::vector<unsigned char> raw;
  std::vector<png_bytep> rows;
  volatile bool format_ok = true;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError(path.string() + ": " + sink.message);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);

  if ((bit_depth != 8 && bit_depth != 16) ||
      (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB)) {
    format_ok = false;
  } else {
    const size_t channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    const size_t row_bytes = static_cast<size_t>(width) * channels * (bit_depth / 8);
    raw.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (!format_ok)
    throw FormatError(path.string() + ": unsupported PNG layout (bit depth " + std::to_string(bit_depth) +
                      ", color type " + std::to_string(color_type) + "); need 8/16-bit gray or RGB");

  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  Image img(static_cast<int>(height), static_cast<int>(width), channels);
  auto out = img.values();
  if (bit_depth == 8) {
    for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(raw[i] / 255.0);
  } else {
    // PNG stores 16-bit samples big-endian.
    for (size_t i = 0; i < out.size(); ++i) {
      const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
      out[i] = static_cast<float>(v / 65535.0);
    }
  }
  return img;
}

void save_image(const Image& img, const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ArgumentError("bit depth must be 8 or 16");
  if (img.channels() != 1 && img.channels() != 3)
    throw ArgumentError("save_image supports 1 or 3 channels, got " + std::to_string(img.channels()));
  if (img.empty()) throw ArgumentError("cannot save an empty image");

  const size_t bytes_per = static_cast<size_t>(bit_depth / 8);
  const size_t row_bytes = static_cast<size_t>(img.width()) * img.channels() * bytes_per;
  std::vector<unsigned char> raw(row_bytes * img.height());
  auto in = img.values();
  for (size_t i = 0; i < in.size(); ++i) {
    const unsigned q = quantize(in[i], bit_depth);
    if (bit_depth == 8) {
      raw[i] = static_cast<unsigned char>(q);
    } else {
      raw[2 * i] = static_cast<unsigned char>(q >> 8);
      raw[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
    }
  }
  std::vector<png_bytep> rows(static_cast<size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) rows[static_cast<size_t>(y)] = raw.data() + y * row_bytes;

  AtomicFile target(path);
  {
    FilePtr file(std::fopen(target.temp_path().c_str(), "wb"));
    if (!file) throw IoError("cannot open " + path.string() + " for writing");

    PngErrorSink sink;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_fn, png_warning_fn);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
      png_destroy_write_struct(&png, nullptr);
      throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw IoError(path.string() + ": " + sink.message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()),
                 bit_depth, img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) throw IoError("write failed for " + path.string());
  }
  target.commit();
}

}  // namespace bpam
