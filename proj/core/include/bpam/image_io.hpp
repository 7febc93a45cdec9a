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

#include <filesystem>

#include "bpam/image.hpp"

namespace bpam {

// Loads an 8- or 16-bit grayscale or RGB PNG, scaling samples to [0, 1].
// Throws FormatError for other layouts and DecodeError for corrupt data.
Image load_image(const std::filesystem::path& path);

// Writes a 1- or 3-channel image with round-half-up quantization to
// `bit_depth` (8 or 16) bits. The file is written to a temporary sibling and
// renamed into place.
void save_image(const Image& img, const std::filesystem::path& path, int bit_depth = 8);

// The integer code save_image stores for `v` at `bit_depth`.
unsigned quantize(float v, int bit_depth);

}  // namespace bpam
