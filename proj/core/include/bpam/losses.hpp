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

#include <functional>

#include "bpam/image.hpp"

namespace bpam {

template <class T>
struct LossResult {
  double value = 0.0;
  ImageT<T> grad;  // d value / d output
};

// Mean squared error over all values.
template <class T>
LossResult<T> mse_loss(const ImageT<T>& out, const ImageT<T>& target);

// 1 - SSIM (see metrics.hpp for the window and constants).
template <class T>
LossResult<T> ssim_loss(const ImageT<T>& out, const ImageT<T>& target);

struct LossWeights {
  double w_mse = 1.0;
  double w_ssim = 0.5;
  // Weight of an optional perceptual term. No perceptual network ships with
  // the library; a positive weight requires a registered hook.
  double w_per = 0.0;
};

// Optional perceptual term: returns its value and writes d/d out into grad.
template <class T>
using PerceptualHook = std::function<double(const ImageT<T>& out, const ImageT<T>& target, ImageT<T>& grad)>;

template <class T>
struct TotalLoss {
  double total = 0.0;
  double mse = 0.0;
  double ssim = 0.0;
  double perceptual = 0.0;
  ImageT<T> grad;
};

template <class T>
TotalLoss<T> total_loss(const ImageT<T>& out, const ImageT<T>& target, const LossWeights& w,
                        const PerceptualHook<T>& hook = {});

}  // namespace bpam
