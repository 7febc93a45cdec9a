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

#include "bpam/errors.hpp"
#include "bpam/losses.hpp"
#include "bpam/metrics.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace bpam;

TEST_CASE("psnr closed forms and cap") {
  const auto a = testutil::random_image<double>(8, 8, 3, 1);
  CHECK(psnr(a, a) == kPsnrCap);
  ImageD b(4, 4, 3, 0.2), c(4, 4, 3, 0.3);
  CHECK(psnr(b, c) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(psnr(ImageD(4, 4, 3, 0.0), ImageD(4, 4, 3, 1.0)) == doctest::Approx(0.0));
  CHECK(psnr(b, c) == psnr(c, b));
  CHECK_THROWS_AS(psnr(b, ImageD(4, 5, 3)), ArgumentError);
}

TEST_CASE("ssim identities and oracle") {
  const auto x = testutil::random_image(20, 23, 3, 2);
  const auto y = testutil::random_image(20, 23, 3, 3);
  CHECK(ssim_metric(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ssim_metric(x, y) == doctest::Approx(ssim_metric(y, x)).epsilon(1e-12));
  CHECK(std::abs(ssim_metric(x, y) - oracle::ssim(x, y)) < 1e-5);
  // Correlated pair gives a mid-range value.
  auto z = x;
  for (size_t i = 0; i < z.size(); ++i) z.values()[i] = 0.7f * x.values()[i] + 0.3f * y.values()[i];
  CHECK(std::abs(ssim_metric(x, z) - oracle::ssim(x, z)) < 1e-5);
  CHECK_THROWS_AS(ssim_metric(Image(10, 30, 3), Image(10, 30, 3)), ArgumentError);
  CHECK_THROWS_AS(ssim_metric(x, Image(20, 22, 3)), ArgumentError);

  const auto k = ssim_kernel();
  double s = 0;
  for (double v : k) s += v;
  CHECK(s == doctest::Approx(1.0));
  CHECK(k[5] > k[4]);
}

TEST_CASE("ssim gradient matches finite differences") {
  const auto x = testutil::random_image<double>(13, 14, 2, 4);
  const auto y = testutil::random_image<double>(13, 14, 2, 5);
  const auto r = ssim_with_grad(x, y, true);
  const double h = 1e-6;
  for (size_t i = 0; i < x.size(); i += 7) {
    auto a = x, b = x;
    a.values()[i] += h;
    b.values()[i] -= h;
    const double num = (ssim_metric(a, y) - ssim_metric(b, y)) / (2 * h);
    CHECK(num == doctest::Approx(r.grad.values()[i]).epsilon(1e-5).scale(1e-4));
  }
}

TEST_CASE("delta_e colorimetry") {
  const auto white = srgb_to_lab(1, 1, 1);
  CHECK(white[0] == doctest::Approx(100.0));
  CHECK(std::abs(white[1]) < 1e-9);
  CHECK(std::abs(white[2]) < 1e-9);
  CHECK(std::abs(delta_e(Image(3, 3, 3, 1.0f), Image(3, 3, 3, 0.0f)) - 100.0) < 0.1);
  const auto a = testutil::random_image(9, 11, 3, 6);
  const auto b = testutil::random_image(9, 11, 3, 7);
  CHECK(delta_e(a, a) == 0.0);
  CHECK(std::abs(delta_e(a, b) - oracle::delta_e(a, b)) < 1e-3);
  CHECK(delta_e(a, b) == doctest::Approx(delta_e(b, a)));
  for (int i = 0; i < 20; ++i) {
    const double r = i / 19.0, g = 1 - r, bl = 0.5 * r;
    const auto l = srgb_to_lab(r, g, bl);
    const auto o = oracle::lab(r, g, bl);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(l[size_t(c)] - o[size_t(c)]) < 1e-6);
  }
  CHECK_THROWS_AS(delta_e(Image(2, 2, 1), Image(2, 2, 1)), ArgumentError);
}

TEST_CASE("evaluate on identical images") {
  const auto a = testutil::random_image(16, 16, 3, 8);
  const auto m = evaluate(a, a);
  CHECK(m.psnr == 99.0);
  CHECK(m.ssim == doctest::Approx(1.0));
  CHECK(m.delta_e == 0.0);
}

TEST_CASE("ssim loss is one minus the metric") {
  const auto x = testutil::random_image<double>(16, 12, 3, 9);
  const auto y = testutil::random_image<double>(16, 12, 3, 10);
  const auto l = ssim_loss(x, y);
  CHECK(l.value + ssim_metric(x, y) == doctest::Approx(1.0).epsilon(1e-15));
  const auto g = ssim_with_grad(x, y, true);
  for (size_t i = 0; i < x.size(); ++i) CHECK(l.grad.values()[i] == -g.grad.values()[i]);
}

TEST_CASE("mse loss and gradient") {
  const ImageD a(2, 2, 3, 0.5), b(2, 2, 3, 0.25);
  const auto l = mse_loss(a, b);
  CHECK(l.value == doctest::Approx(0.0625));
  for (double v : l.grad.values()) CHECK(v == doctest::Approx(2 * 0.25 / 12));
  CHECK_THROWS_AS(mse_loss(a, ImageD(2, 3, 3)), ArgumentError);
}

TEST_CASE("total loss weights and perceptual hook") {
  const auto x = testutil::random_image<double>(12, 12, 3, 11);
  const auto y = testutil::random_image<double>(12, 12, 3, 12);
  LossWeights w;
  const auto t = total_loss(x, y, w);
  CHECK(t.total == doctest::Approx(mse_loss(x, y).value + 0.5 * ssim_loss(x, y).value));
  CHECK(t.perceptual == 0.0);
  w.w_per = 0.005;
  CHECK_THROWS_AS(total_loss(x, y, w), ConfigError);
  PerceptualHook<double> hook = [](const ImageD& o, const ImageD&, ImageD& g) {
    g = ImageD(o.height(), o.width(), o.channels(), 1.0);
    return 2.0;
  };
  const auto p = total_loss(x, y, w, hook);
  CHECK(p.perceptual == 2.0);
  CHECK(p.total == doctest::Approx(t.total + 0.01));
  CHECK(p.grad.values()[0] == doctest::Approx(t.grad.values()[0] + 0.005));
  w.w_mse = -1;
  CHECK_THROWS_AS(total_loss(x, y, w), ConfigError);
}
