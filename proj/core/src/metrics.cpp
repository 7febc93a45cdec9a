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

#include "bpam/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "bpam/parallel.hpp"

namespace bpam {
namespace {

template <class T, class U>
void check_same(const ImageT<T>& a, const ImageT<U>& b, const char* op) {
  if (!a.same_shape(b))
    throw ArgumentError(std::string(op) + ": shapes differ (" + std::to_string(a.height()) + "x" +
                        std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                        std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                        std::to_string(b.channels()) + ")");
}

using Plane = std::vector<double>;

// Valid-mode separable Gaussian filter of an h x w plane.
Plane filter_valid(const Plane& in, int h, int w, const std::array<double, kSsimWindow>& k) {
  const int oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;
  Plane tmp(static_cast<size_t>(h) * ow, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[static_cast<size_t>(i)] * in[static_cast<size_t>(y) * w + x + i];
      tmp[static_cast<size_t>(y) * ow + x] = s;
    }
  Plane out(static_cast<size_t>(oh) * ow, 0.0);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[static_cast<size_t>(i)] * tmp[static_cast<size_t>(y + i) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = s;
    }
  return out;
}

// Adjoint of filter_valid: scatters an (h-10) x (w-10) map back to h x w.
Plane filter_adjoint(const Plane& m, int h, int w, const std::array<double, kSsimWindow>& k) {
  const int oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;
  Plane tmp(static_cast<size_t>(h) * ow, 0.0);
  for (int y = 0; y < oh; ++y)
    for (int i = 0; i < kSsimWindow; ++i)
      for (int x = 0; x < ow; ++x)
        tmp[static_cast<size_t>(y + i) * ow + x] += k[static_cast<size_t>(i)] * m[static_cast<size_t>(y) * ow + x];
  Plane out(static_cast<size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      const double v = tmp[static_cast<size_t>(y) * ow + x];
      for (int i = 0; i < kSsimWindow; ++i) out[static_cast<size_t>(y) * w + x + i] += k[static_cast<size_t>(i)] * v;
    }
  return out;
}

double srgb_to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }

double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

}  // namespace

template <class T>
double psnr(const ImageT<T>& a, const ImageT<T>& b) {
  check_same(a, b, "psnr");
  if (a.empty()) throw ArgumentError("psnr: empty images");
  double s = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (size_t i = 0; i < av.size(); ++i) {
    const double d = static_cast<double>(av[i]) - static_cast<double>(bv[i]);
    s += d * d;
  }
  const double mse = s / static_cast<double>(av.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

std::array<double, kSsimWindow> ssim_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    k[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[static_cast<size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

template <class T>
SsimResult<T> ssim_with_grad(const ImageT<T>& x, const ImageT<T>& y, bool want_grad) {
  check_same(x, y, "ssim");
  const int h = x.height(), w = x.width(), C = x.channels();
  if (h < kSsimWindow || w < kSsimWindow)
    throw ArgumentError("ssim: image " + std::to_string(h) + "x" + std::to_string(w) + " is smaller than the " +
                        std::to_string(kSsimWindow) + "x" + std::to_string(kSsimWindow) + " window");
  const auto k = ssim_kernel();
  const int oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;
  const size_t npos = static_cast<size_t>(oh) * ow;
  const double norm = 1.0 / (static_cast<double>(npos) * C);

  SsimResult<T> res;
  if (want_grad) res.grad = ImageT<T>(h, w, C);
  std::vector<double> channel_sum(static_cast<size_t>(C), 0.0);

  parallel_for(0, C, [&](int c) {
    const size_t n = static_cast<size_t>(h) * w;
    Plane px(n), py(n), pxx(n), pyy(n), pxy(n);
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < w; ++xx) {
        const size_t i = static_cast<size_t>(yy) * w + xx;
        const double a = x.at(yy, xx, c), b = y.at(yy, xx, c);
        px[i] = a;
        py[i] = b;
        pxx[i] = a * a;
        pyy[i] = b * b;
        pxy[i] = a * b;
      }
    const Plane mx = filter_valid(px, h, w, k), my = filter_valid(py, h, w, k);
    const Plane exx = filter_valid(pxx, h, w, k), eyy = filter_valid(pyy, h, w, k);
    const Plane exy = filter_valid(pxy, h, w, k);
    Plane alpha, beta, gamma;
    if (want_grad) {
      alpha.resize(npos);
      beta.resize(npos);
      gamma.resize(npos);
    }
    double sum = 0.0;
    for (size_t i = 0; i < npos; ++i) {
      const double ux = mx[i], uy = my[i];
      const double sxx = exx[i] - ux * ux, syy = eyy[i] - uy * uy, sxy = exy[i] - ux * uy;
      const double a1 = 2.0 * ux * uy + kSsimC1, a2 = 2.0 * sxy + kSsimC2;
      const double b1 = ux * ux + uy * uy + kSsimC1, b2 = sxx + syy + kSsimC2;
      const double s = (a1 * a2) / (b1 * b2);
      sum += s;
      if (want_grad) {
        // S(ux, sxx, sxy) partials, then chained through the moments.
        const double d_ux = 2.0 * uy * a2 / (b1 * b2) - s * 2.0 * ux / b1;
        const double d_sxx = -s / b2;
        const double d_sxy = 2.0 * a1 / (b1 * b2);
        alpha[i] = (d_ux - 2.0 * ux * d_sxx - uy * d_sxy) * norm;
        beta[i] = 2.0 * d_sxx * norm;
        gamma[i] = d_sxy * norm;
      }
    }
    channel_sum[static_cast<size_t>(c)] = sum;
    if (want_grad) {
      const Plane ta = filter_adjoint(alpha, h, w, k), tb = filter_adjoint(beta, h, w, k);
      const Plane tg = filter_adjoint(gamma, h, w, k);
      for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
          const size_t i = static_cast<size_t>(yy) * w + xx;
          res.grad.at(yy, xx, c) = static_cast<T>(ta[i] + px[i] * tb[i] + py[i] * tg[i]);
        }
    }
  });
  double total = 0.0;
  for (double s : channel_sum) total += s;
  res.value = total * norm;
  return res;
}

std::array<double, 3> srgb_to_lab(double r, double g, double b) {
  const double lin[3] = {srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b)};
  double xyz[3], white[3];
  for (int i = 0; i < 3; ++i) {
    xyz[i] = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
    // D65 white as the image of RGB (1, 1, 1), so neutrals map to a* = b* = 0.
    white[i] = kRgbToXyz[i][0] + kRgbToXyz[i][1] + kRgbToXyz[i][2];
  }
  const double fx = lab_f(xyz[0] / white[0]);
  const double fy = lab_f(xyz[1] / white[1]);
  const double fz = lab_f(xyz[2] / white[2]);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

template <class T>
double delta_e(const ImageT<T>& a, const ImageT<T>& b) {
  check_same(a, b, "delta_e");
  if (a.channels() != 3) throw ArgumentError("delta_e needs 3-channel images, got " + std::to_string(a.channels()));
  if (a.empty()) throw ArgumentError("delta_e: empty images");
  std::vector<double> rows(static_cast<size_t>(a.height()), 0.0);
  parallel_for(0, a.height(), [&](int y) {
    double s = 0.0;
    for (int x = 0; x < a.width(); ++x) {
      const T* p = a.pixel(y, x);
      const T* q = b.pixel(y, x);
      const auto la = srgb_to_lab(p[0], p[1], p[2]);
      const auto lb = srgb_to_lab(q[0], q[1], q[2]);
      const double d0 = la[0] - lb[0], d1 = la[1] - lb[1], d2 = la[2] - lb[2];
      s += std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
    }
    rows[static_cast<size_t>(y)] = s;
  });
  double total = 0.0;
  for (double s : rows) total += s;
  return total / static_cast<double>(a.pixel_count());
}

MetricReport evaluate(const Image& a, const Image& b) {
  MetricReport r;
  r.psnr = psnr(a, b);
  r.ssim = ssim_metric(a, b);
  r.delta_e = a.channels() == 3 ? delta_e(a, b) : 0.0;
  return r;
}

template double psnr(const ImageT<float>&, const ImageT<float>&);
template double psnr(const ImageT<double>&, const ImageT<double>&);
template SsimResult<float> ssim_with_grad(const ImageT<float>&, const ImageT<float>&, bool);
template SsimResult<double> ssim_with_grad(const ImageT<double>&, const ImageT<double>&, bool);
template double delta_e(const ImageT<float>&, const ImageT<float>&);
template double delta_e(const ImageT<double>&, const ImageT<double>&);

}  // namespace bpam
