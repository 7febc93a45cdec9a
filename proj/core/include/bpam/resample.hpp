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

#include "bpam/image.hpp"

namespace bpam {

// Area-average downsampling by an integer factor. Dimensions that are not a
// multiple of the factor are padded by edge replication first.
template <class T>
ImageT<T> downsample(const ImageT<T>& img, int factor);

// Space-to-depth. Output channel c*f*f + dy*f + dx holds input channel c at
// offset (dy, dx) of each f x f block.
template <class T>
ImageT<T> pixel_unshuffle(const ImageT<T>& feat, int factor);

// Inverse of pixel_unshuffle.
template <class T>
ImageT<T> pixel_shuffle(const ImageT<T>& feat, int factor);

}  // namespace bpam
