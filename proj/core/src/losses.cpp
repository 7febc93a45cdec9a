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

#include "bpam/losses.hpp"

#include <string>

#include "bpam/metrics.hpp"

namespace bpam {

template <class T>
LossResult<T> mse_loss(const ImageT<T>& out, const ImageT<T>& target) {
  if (!out.same_shape(target)) throw ArgumentError("mse_loss: shapes differ");
  if (out.empty()) throw ArgumentError("mse_loss: empty images");
  LossResult<T> r;
  r.grad = ImageT<T>(out.height(), out.width(), out.channels());
  auto o = out.values();
  auto t = target.values();
  auto g = r.grad.values();
  const double n = static_cast<double>(o.size());
  double s = 0.0;
  for (size_t i = 0; i < o.size(); ++i) {
    const double d = static_cast<double>(o[i]) - static_cast<double>(t[i]);
    s += d * d;
    g[i] = static_cast<T>(2.0 * d / n);
  }
  r.value = s / n;
  return r;
}

template <class T>
LossResult<T> ssim_loss(const ImageT<T>& out, const ImageT<T>& target) {
  auto s = ssim_with_grad(out, target, true);
  LossResult<T> r;
  r.value = 1.0 - s.value;
  r.grad = std::move(s.grad);
  for (T& v : r.grad.values()) v = -v;
  return r;
}

template <class T>
TotalLoss<T> total_loss(const ImageT<T>& out, const ImageT<T>& target, const LossWeights& w,
                        const PerceptualHook<T>& hook) {
  if (w.w_mse < 0 || w.w_ssim < 0 || w.w_per < 0) throw ConfigError("loss weights must be non-negative");
  if (w.w_per > 0 && !hook) throw ConfigError("perceptual loss weight is positive but no perceptual hook is registered");
  if (!out.same_shape(target)) throw ArgumentError("total_loss: shapes differ");
  TotalLoss<T> r;
  r.grad = ImageT<T>(out.height(), out.width(), out.channels());
  auto g = r.grad.values();
  auto add = [&](const ImageT<T>& part, double weight) {
    auto p = part.values();
    for (size_t i = 0; i < g.size(); ++i) g[i] += static_cast<T>(weight * static_cast<double>(p[i]));
  };
  if (w.w_mse > 0) {
    auto m = mse_loss(out, target);
    r.mse = m.value;
    add(m.grad, w.w_mse);
  }
  if (w.w_ssim > 0) {
    auto s = ssim_loss(out, target);
    r.ssim = s.value;
    add(s.grad, w.w_ssim);
  }
  if (w.w_per > 0) {
    ImageT<T> pg(out.height(), out.width(), out.channels());
    r.perceptual = hook(out, target, pg);
    add(pg, w.w_per);
  }
  r.total = w.w_mse * r.mse + w.w_ssim * r.ssim + w.w_per * r.perceptual;
  return r;
}

template LossResult<float> mse_loss(const ImageT<float>&, const ImageT<float>&);
template LossResult<double> mse_loss(const ImageT<double>&, const ImageT<double>&);
template LossResult<float> ssim_loss(const ImageT<float>&, const ImageT<float>&);
template LossResult<double> ssim_loss(const ImageT<double>&, const ImageT<double>&);
template TotalLoss<float> total_loss(const ImageT<float>&, const ImageT<float>&, const LossWeights&,
                                     const PerceptualHook<float>&);
template TotalLoss<double> total_loss(const ImageT<double>&, const ImageT<double>&, const LossWeights&,
                                      const PerceptualHook<double>&);

}  // namespace bpam
