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

#include "bpam/image.hpp"

namespace bpam {

// PSNR reported for identical images (zero MSE).
inline constexpr double kPsnrCap = 99.0;

// 10 * log10(1 / MSE) on unit-range images, capped at kPsnrCap.
template <class T>
double psnr(const ImageT<T>& a, const ImageT<T>& b);

// SSIM constants: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03 on
// a unit dynamic range. Windows are evaluated at every fully-inside position
// of each channel and the result is the mean over positions and channels.
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

std::array<double, kSsimWindow> ssim_kernel();

template <class T>
struct SsimResult {
  double value = 0.0;
  ImageT<T> grad;  // d value / d first argument; empty unless requested
};

template <class T>
SsimResult<T> ssim_with_grad(const ImageT<T>& x, const ImageT<T>& y, bool want_grad);

template <class T>
double ssim_metric(const ImageT<T>& a, const ImageT<T>& b) {
  return ssim_with_grad(a, b, false).value;
}

// sRGB (IEC 61966-2-1) -> linear -> XYZ (D65) -> CIELAB.
std::array<double, 3> srgb_to_lab(double r, double g, double b);

// Mean CIE76 color difference between two RGB images interpreted as sRGB.
template <class T>
double delta_e(const ImageT<T>& a, const ImageT<T>& b);

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double delta_e = 0.0;
};

MetricReport evaluate(const Image& a, const Image& b);

}  // namespace bpam
