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

#include <algorithm>
#include <random>

#include "bpam/errors.hpp"
#include "bpam/grid.hpp"
#include "bpam/guidance.hpp"
#include "bpam/gradcheck.hpp"
#include "bpam/image_io.hpp"
#include "bpam/losses.hpp"
#include "bpam/mlp.hpp"
#include "bpam/optim.hpp"
#include "bpam/pipeline.hpp"
#include "bpam/producer.hpp"
#include "bpam/resample.hpp"
#include "bpam/slicing.hpp"
#include "bpam/trainer.hpp"
#include "doctest.h"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace bpam;

// ---- imaging ---------------------------------------------------------------

TEST_CASE("png code values map to the unit range") {
  testutil::TempDir dir;
  Image a(2, 2, 3, 0.0f);
  a.at(1, 0, 2) = 1.0f;
  save_image(a, dir / "a.png", 8);
  CHECK(load_image(dir / "a.png").at(1, 0, 2) == 1.0f);
  save_image(Image(2, 2, 1, 0.0f), dir / "z.png", 16);
  CHECK(load_image(dir / "z.png").at(0, 0) == 0.0f);
  CHECK(quantize(1.0f, 8) == 255u);
  CHECK(quantize(0.5f, 8) == 128u);

  const auto r = testutil::random_image(9, 13, 3, 77);
  save_image(r, dir / "r.png", 8);
  CHECK(testutil::max_abs_diff(load_image(dir / "r.png"), r) <= 0.5 / 255 + 1e-7);
}

TEST_CASE("downsample is a block mean") {
  CHECK(downsample(Image(6, 9, 3, 0.3f), 3) == Image(2, 3, 3, 0.3f));
  Image b(2, 2, 1);
  b.at(1, 0) = 1.0f;
  b.at(1, 1) = 1.0f;
  CHECK(downsample(b, 2).at(0, 0) == 0.5f);

  const auto img = testutil::random_image<double>(8, 8, 2, 5);
  const auto d = downsample(img, 2);
  double mean_in = 0, mean_out = 0;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 2; ++c) {
        double s = 0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) s += img.at(2 * y + dy, 2 * x + dx, c);
        CHECK(std::abs(d.at(y, x, c) - s / 4) < 1e-6);
      }
  for (double v : img.values()) mean_in += v;
  for (double v : d.values()) mean_out += v;
  CHECK(mean_in / img.size() == doctest::Approx(mean_out / d.size()).epsilon(1e-9));
  CHECK_THROWS_AS(downsample(img, 0), ArgumentError);
}

TEST_CASE("pixel unshuffle channel order") {
  Image a(4, 4, 1);
  for (int i = 0; i < 16; ++i) a.values()[size_t(i)] = float(i);
  const auto u = pixel_unshuffle(a, 4);
  REQUIRE(u.channels() == 16);
  for (int k = 0; k < 16; ++k) CHECK(u.at(0, 0, k) == a.at(k / 4, k % 4));
  CHECK(pixel_unshuffle(a, 1) == a);
  const auto r = testutil::random_image(6, 9, 2, 4);
  auto before = r.storage(), after = pixel_unshuffle(r, 3).storage();
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  CHECK(before == after);
}

// ---- bilateral grid --------------------------------------------------------

TEST_CASE("coordinate lifting worked values") {
  GridGeometry g;
  g.grid_h = 16;
  g.grid_w = 16;
  g.depth = 8;
  g.image_h = 128;
  g.image_w = 128;
  g.align_centers = false;
  CHECK(lift(16, 0, 0.0, g).u == 2.0);
  CHECK(lift(0, 0, 0.0, g).r == 0.0);
  CHECK(lift(0, 0, 1.0, g).r == 7.0);
  g.align_centers = true;
  CHECK(lift(0, 0, 0.5, g).u == doctest::Approx(-0.4375));
  CHECK(split_frac<double>(2.3, 16).index == 2);
  CHECK(split_frac<double>(2.3, 16).frac == doctest::Approx(0.3));
  CHECK(split_frac<double>(-0.4, 16).index == 0);
  CHECK(split_frac<double>(-0.4, 16).frac == 0.0);
  CHECK(split_frac<double>(15.0, 16).index == 15);
  CHECK(split_frac<double>(15.0, 16).frac == 0.0);
}

TEST_CASE("trilinear weight corners and centre") {
  for (double w : trilinear_weights(0.5, 0.5, 0.5)) CHECK(w == 0.125);
  const auto c = trilinear_weights(1, 1, 1);
  CHECK(c[7] == 1.0);
  for (int i = 0; i < 7; ++i) CHECK(c[size_t(i)] == 0.0);
}

TEST_CASE("slicing worked cases") {
  GridGeometry g;
  g.grid_h = 4;
  g.grid_w = 4;
  g.depth = 4;
  g.image_h = 16;
  g.image_w = 16;
  const auto guide = testutil::random_image(16, 16, 1, 1);
  const Image cst = slice(BilateralGrid(g, 3, 0.75f), guide);
  for (float v : cst.values()) CHECK(std::abs(v - 0.75f) < 1e-6);

  g.align_centers = false;
  const auto grid = testutil::random_grid<float>(g, 2, 2);
  const auto out = slice(grid, Image(16, 16, 1, 0.0f));
  CHECK(out.at(0, 0, 0) == grid.at(0, 0, 0, 0));
  CHECK(out.at(0, 0, 1) == grid.at(0, 0, 0, 1));
  CHECK(testutil::max_abs_diff(slice(grid, guide), oracle::slice(grid, guide)) < 1e-6);

  // Linear in the grid.
  const auto g1 = testutil::random_grid<float>(g, 2, 3), g2 = testutil::random_grid<float>(g, 2, 4);
  BilateralGrid mix(g, 2);
  for (size_t i = 0; i < mix.size(); ++i) mix.values()[i] = 0.3f * g1.values()[i] - 1.7f * g2.values()[i];
  const auto s1 = slice(g1, guide), s2 = slice(g2, guide), sm = slice(mix, guide);
  for (size_t i = 0; i < sm.size(); ++i) CHECK(std::abs(sm.values()[i] - (0.3f * s1.values()[i] - 1.7f * s2.values()[i])) < 1e-5);
}

TEST_CASE("slicing is Lipschitz in the guidance") {
  std::mt19937_64 rng(8);
  GridGeometry g;
  g.grid_h = 3;
  g.grid_w = 5;
  g.depth = 6;
  g.image_h = 12;
  g.image_w = 20;
  const auto grid = testutil::random_grid<double>(g, 4, 9);
  double lo = 1e9, hi = -1e9;
  for (double v : grid.values()) lo = std::min(lo, v), hi = std::max(hi, v);
  const auto guide = testutil::random_image<double>(12, 20, 1, 10);
  for (double eps : {1e-3, 1e-2, 0.1}) {
    auto moved = guide;
    for (double& v : moved.values()) v = std::clamp(v + eps, 0.0, 1.0);
    CHECK(testutil::max_abs_diff(slice(grid, moved), slice(grid, guide)) <= eps * (g.depth - 1) * (hi - lo) + 1e-12);
  }
}

TEST_CASE("slice_backward trivial cases") {
  GridGeometry g;
  g.grid_h = 2;
  g.grid_w = 3;
  g.depth = 4;
  g.image_h = 8;
  g.image_w = 9;
  const auto grid = testutil::random_grid<double>(g, 3, 1);
  const auto guide = testutil::random_image<double>(8, 9, 1, 2);
  const auto zero = slice_backward(grid, guide, ImageD(8, 9, 3, 0.0));
  for (double v : zero.grid.values()) CHECK(v == 0.0);
  for (double v : zero.guidance.values()) CHECK(v == 0.0);
  const auto flat = slice_backward(BilateralGridT<double>(g, 3, 0.4), guide, testutil::random_image<double>(8, 9, 3, 3));
  for (double v : flat.guidance.values()) CHECK(v == 0.0);
  // Directional derivative against a grid perturbation.
  const auto up = testutil::random_image<double>(8, 9, 3, 4, -1, 1);
  const auto dir = testutil::random_grid<double>(g, 3, 5);
  const auto gb = slice_backward(grid, guide, up);
  auto moved = grid;
  for (size_t i = 0; i < moved.size(); ++i) moved.values()[i] += 1e-3 * dir.values()[i];
  const auto a = slice(moved, guide), b = slice(grid, guide);
  double lhs = 0, rhs = 0;
  for (size_t i = 0; i < a.size(); ++i) lhs += up.values()[i] * (a.values()[i] - b.values()[i]);
  for (size_t i = 0; i < dir.size(); ++i) rhs += gb.grid.values()[i] * 1e-3 * dir.values()[i];
  CHECK(relative_error(rhs, lhs) < 1e-4);
}

TEST_CASE("unroll channel arithmetic") {
  GridGeometry g;
  g.depth = 8;
  Image feat(1, 1, 8 * 32, 0.0f);
  feat.at(0, 0, 19) = 1.0f;
  feat.at(0, 0, 255) = 2.0f;
  const auto grid = unroll_grid(feat, 8, 32, g);
  CHECK(grid.at(0, 0, 3, 2) == 1.0f);
  CHECK(grid.at(0, 0, 7, 31) == 2.0f);
  CHECK(grid.at(0, 0, 0, 0) == 0.0f);
  BilateralGrid one(g, 32);
  one.at(0, 0, 3, 2) = 1.0f;
  const auto rolled = roll_grid(one);
  for (int c = 0; c < rolled.channels(); ++c) CHECK(rolled.at(0, 0, c) == (c == 19 ? 1.0f : 0.0f));
}

TEST_CASE("subgrid shapes") {
  GridGeometry g;
  const auto s1 = decompose(BilateralGrid(g, 32), GridKind::kStage1);
  REQUIRE(s1.subgrids.size() == 4);
  for (const auto& s : s1.subgrids) CHECK(s.params() == 8);
  CHECK(s1.roles.back() == SubgridRole::kBias);
  const auto s2 = decompose(BilateralGrid(g, 27), GridKind::kStage2);
  REQUIRE(s2.subgrids.size() == 9);
  for (size_t i = 0; i < 9; ++i) CHECK(s2.subgrids[i].params() == 3);
  CHECK(s2.roles[0] == SubgridRole::kWeight);
  CHECK_THROWS_AS(decompose(BilateralGrid(g, 27), GridKind::kStage1), ArgumentError);
}

TEST_CASE("decomposed slicing per subgrid") {
  GridGeometry g;
  g.grid_h = 3;
  g.grid_w = 2;
  g.depth = 5;
  g.image_h = 9;
  g.image_w = 10;
  auto set = decompose(testutil::random_grid<float>(g, 27, 1), GridKind::kStage2);
  for (float& v : set.subgrids[4].values()) v = 0.125f;
  const auto guide = testutil::random_image(9, 10, 9, 2);
  const auto out = slice_decomposed(set, guide);
  for (int slot : subgrid_slots(GridKind::kStage2)[4])
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 10; ++x) CHECK(std::abs(out.at(y, x, slot) - 0.125f) < 1e-6);
  for (size_t k = 0; k < set.subgrids.size(); ++k) {
    const auto ref = oracle::slice(set.subgrids[k], extract_channel(guide, int(k)));
    const auto& slots = subgrid_slots(GridKind::kStage2)[k];
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 10; ++x)
        for (size_t j = 0; j < slots.size(); ++j) CHECK(std::abs(out.at(y, x, slots[j]) - ref.at(y, x, int(j))) < 1e-5);
  }
  CHECK_THROWS_AS(slice_decomposed(set, Image(9, 10, 4)), ArgumentError);
}

// ---- transform -------------------------------------------------------------

TEST_CASE("per-pixel transform worked cases") {
  AffineParams<double> a;
  a.beta = {0.1, 0.2, 0.3};
  const auto o = apply_affine(a, Color<double>{0.9, 0.5, 0.1});
  CHECK(o == Color<double>{0.1, 0.2, 0.3});

  std::array<double, 24> w1{};
  std::array<double, 8> b1{};
  for (int c = 0; c < 3; ++c) w1[size_t(w1_slot(c, c))] = 1.0;
  using S = std::span<const double>;
  const auto z = mlp_stage1<double>(S(w1), S(b1), Color<double>{0.2, 0.5, 0.7});
  CHECK(z == Hidden<double>{0.2, 0.5, 0.7, 0, 0, 0, 0, 0});
  b1.fill(-1.0);
  w1.fill(0.0);
  CHECK(mlp_stage1<double>(S(w1), S(b1), Color<double>{0.2, 0.5, 0.7}) == Hidden<double>{});
  std::array<double, 24> w2{};
  for (int c = 0; c < 3; ++c) w2[size_t(w2_slot(c, c))] = 1.0;
  const std::array<double, 3> b2{};
  CHECK(mlp_stage2<double>(S(w2), S(b2), z) == Color<double>{0.2, 0.5, 0.7});
}

TEST_CASE("bias-only grids give a uniform image") {
  PipelineConfig cfg;
  const auto geom = geometry_for_ratio(16, 16, 4, 4);
  auto m = Model::random(cfg, geom, 3);
  for (float& v : m.grids[0].values()) v = 0.0f;
  m.grids[1] = BilateralGrid(geom, 27);
  const float b2[3] = {0.25f, 0.5f, 0.75f};
  for (int y = 0; y < geom.grid_h; ++y)
    for (int x = 0; x < geom.grid_w; ++x)
      for (int zz = 0; zz < geom.depth; ++zz)
        for (int o = 0; o < 3; ++o) m.grids[1].at(y, x, zz, b2_slot(o)) = b2[o];
  const auto out = enhance(testutil::random_image(16, 16, 3, 4), m);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int o = 0; o < 3; ++o) CHECK(std::abs(out.at(y, x, o) - b2[o]) < 1e-6);
}

TEST_CASE("decomposed and monolithic pipelines agree for identical guidance channels") {
  PipelineConfig dec;
  dec.grid_ratio = 4;
  dec.depth = 5;
  PipelineConfig mono = dec;
  mono.decomposed = false;
  const auto geom = geometry_for_ratio(12, 16, 4, 5);
  const auto md = Model::random(mono, geom, 5, 0.3);
  auto mdd = ModelT<float>::identity(dec, geom, 1);
  mdd.grids = md.grids;
  // Each decomposed net repeats the single monolithic output row.
  auto widen = [](const GuidanceNet& n, int k) {
    GuidanceNet w = GuidanceNet::zeros(n.in_channels, k, n.hidden);
    w.w1 = n.w1;
    w.b1 = n.b1;
    for (int o = 0; o < k; ++o) {
      std::copy(n.w2.begin(), n.w2.end(), w.w2.begin() + o * n.hidden);
      w.b2[size_t(o)] = n.b2[0];
    }
    return w;
  };
  mdd.gnet1 = widen(md.gnet1, 4);
  mdd.gnet2 = widen(md.gnet2, 9);
  const auto img = testutil::random_image(12, 16, 3, 6);
  CHECK(testutil::max_abs_diff(enhance(img, mdd), enhance(img, md)) < 1e-5);
  CHECK(testutil::max_abs_diff(pipeline_forward(mdd, img).output, pipeline_forward(md, img).output) < 1e-5);
}

TEST_CASE("pipeline backward worked cases") {
  PipelineConfig cfg;
  cfg.grid_ratio = 4;
  cfg.depth = 4;
  cfg.clamp_output = false;
  const auto geom = geometry_for_ratio(8, 8, 4, 4);
  const auto m = ModelD::random(cfg, geom, 9, 0.2);
  const auto img = testutil::random_image<double>(8, 8, 3, 10);
  const auto c = pipeline_forward(m, img);
  auto zero = pipeline_backward(m, c, ImageD(8, 8, 3, 0.0));
  for (const auto& p : zero.parameters())
    for (double v : p.values) CHECK(v == 0.0);

  // With upstream 1, the b2 slots collect the slicing weights of their cell.
  const auto grads = pipeline_backward(m, c, ImageD(8, 8, 3, 1.0));
  for (int j = 0; j < geom.grid_h; ++j)
    for (int i = 0; i < geom.grid_w; ++i)
      for (int k = 0; k < geom.depth; ++k) {
        double w = 0;
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            const double u = oracle::axis_coord(x, 8, geom.grid_w, true);
            const double v = oracle::axis_coord(y, 8, geom.grid_h, true);
            const double r = c.guide2.at(y, x, 8) * (geom.depth - 1);
            w += oracle::tent(u, i, geom.grid_w) * oracle::tent(v, j, geom.grid_h) * oracle::tent(r, k, geom.depth);
          }
        for (int o = 0; o < 3; ++o) CHECK(grads.grids[1].at(j, i, k, b2_slot(o)) == doctest::Approx(w).epsilon(1e-12));
      }
}

// ---- guidance --------------------------------------------------------------

TEST_CASE("guidance worked cases") {
  auto net = GuidanceNetD::zeros(3, 2);
  const auto img = testutil::random_image<double>(4, 5, 3, 1);
  const ImageD half = guidance_forward(net, img);
  for (double v : half.values()) CHECK(v == 0.5);
  net.b2 = {20.0, 20.0};
  const ImageD sat = guidance_forward(net, img);
  for (double v : sat.values()) CHECK(std::abs(v - 1.0) < 1e-8);

  net.b2 = {0.0, 0.0};
  const auto up = testutil::random_image<double>(4, 5, 2, 2, -1, 1);
  const auto g = guidance_backward(net, img, up);
  for (int k = 0; k < 2; ++k) {
    double s = 0;
    for (int p = 0; p < 20; ++p) s += up.values()[size_t(p * 2 + k)];
    CHECK(g.net.b2[size_t(k)] == doctest::Approx(0.25 * s));
  }
  const auto z = guidance_backward(net, img, ImageD(4, 5, 2, 0.0));
  for (double v : z.net.w1) CHECK(v == 0.0);
  for (double v : z.input.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(guidance_backward(net, img, ImageD(4, 5, 3)), ArgumentError);
}

TEST_CASE("guidance is pointwise") {
  const auto net = GuidanceNet::create(3, 4, 3);
  auto n2 = net;
  for (auto& v : n2.w2) v = 0.3f;
  const auto img = testutil::random_image(1, 30, 3, 4);
  Image rev(1, 30, 3);
  for (int x = 0; x < 30; ++x)
    for (int c = 0; c < 3; ++c) rev.at(0, x, c) = img.at(0, 29 - x, c);
  const auto a = guidance_forward(n2, img), b = guidance_forward(n2, rev);
  for (int x = 0; x < 30; ++x)
    for (int k = 0; k < 4; ++k) CHECK(a.at(0, x, k) == b.at(0, 29 - x, k));
}

// ---- producer --------------------------------------------------------------

TEST_CASE("default producer shape arithmetic") {
  const ProducerConfig pc;
  const auto net = ProducerNet::create(pc, 5);
  CHECK(net.heads.size() == 2);
  CHECK(net.heads[0].out_channels == 8 * 32);
  CHECK(net.heads[1].out_channels == 8 * 27);
  const auto [gh, gw] = producer_grid_dims(pc, 64, 64);
  CHECK(gh == 4);
  CHECK(gw == 4);
  GridGeometry geom;
  geom.grid_h = 4;
  geom.grid_w = 4;
  geom.depth = 8;
  geom.image_h = 256;
  geom.image_w = 256;
  const auto low = testutil::random_image(64, 64, 3, 6);
  auto busy = net;
  for (auto& h : busy.heads)
    for (float& w : h.weight) w = 0.01f;
  const auto a = produce_grids(busy, low, geom), b = produce_grids(busy, low, geom);
  CHECK(a[0].params() == 32);
  CHECK(a[1].params() == 27);
  CHECK(a == b);
  const auto zero = producer_backward(busy, low, geom, {BilateralGrid(geom, 32), BilateralGrid(geom, 27)});
  for (const auto& c : zero.convs)
    for (float v : c.weight) CHECK(v == 0.0f);
}

// ---- losses and optimizer --------------------------------------------------

TEST_CASE("loss worked cases") {
  const auto a = testutil::random_image<double>(12, 12, 3, 1);
  CHECK(mse_loss(a, a).value == 0.0);
  auto b = a;
  for (double& v : b.values()) v += 0.1;
  CHECK(mse_loss(b, a).value == doctest::Approx(0.01));
  const auto c = testutil::random_image<double>(12, 12, 3, 2);
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += (a.values()[i] - c.values()[i]) * (a.values()[i] - c.values()[i]);
  CHECK(std::abs(mse_loss(a, c).value - s / double(a.size())) < 1e-7);

  const auto same = ssim_loss(a, a);
  CHECK(same.value == doctest::Approx(0.0).scale(1e-12));
  for (double v : same.grad.values()) CHECK(std::abs(v) < 1e-12);
  CHECK(total_loss(a, a, LossWeights{}).total == doctest::Approx(0.0).scale(1e-12));

  // Gradient of the weighted sum against differences.
  const auto t = total_loss(a, c, LossWeights{});
  CHECK(t.total == doctest::Approx(t.mse + 0.5 * t.ssim));
  const double h = 1e-6;
  for (size_t i = 0; i < a.size(); i += 11) {
    auto p = a, m = a;
    p.values()[i] += h;
    m.values()[i] -= h;
    const double num = (total_loss(p, c, LossWeights{}).total - total_loss(m, c, LossWeights{}).total) / (2 * h);
    CHECK(num == doctest::Approx(t.grad.values()[i]).epsilon(1e-4).scale(1e-4));
  }
}

TEST_CASE("adam worked cases") {
  std::vector<double> x = {1.0, -1.0}, g = {0.0, 0.0};
  AdamState s;
  s.step(ParamList<double>{{"x", {2}, x}}, ParamList<double>{{"x", {2}, g}}, 0.1);
  CHECK(x == std::vector<double>{1.0, -1.0});

  // Ten steps on f(x) = sum (x - c)^2 against the reference update.
  std::vector<double> y = {0.5, -2.0, 3.0}, ref = y, c = {1.0, 1.0, -1.0};
  AdamState adam;
  oracle::Adam o;
  for (int t = 0; t < 10; ++t) {
    std::vector<double> gy(3), gr(3);
    for (int i = 0; i < 3; ++i) gy[size_t(i)] = 2 * (y[size_t(i)] - c[size_t(i)]);
    for (int i = 0; i < 3; ++i) gr[size_t(i)] = 2 * (ref[size_t(i)] - c[size_t(i)]);
    adam.step(ParamList<double>{{"y", {3}, y}}, ParamList<double>{{"y", {3}, gy}}, 0.05);
    o.step(ref, gr, 0.05);
  }
  for (int i = 0; i < 3; ++i) CHECK(std::abs(y[size_t(i)] - ref[size_t(i)]) < 1e-10);

  // First update barely moves when gradients are scaled by 1e3.
  std::vector<double> p1 = {0.0, 0.0}, p2 = {0.0, 0.0}, g1 = {0.3, -0.02}, g2 = {300.0, -20.0};
  AdamState s1, s2;
  s1.step(ParamList<double>{{"p", {2}, p1}}, ParamList<double>{{"p", {2}, g1}}, 0.01);
  s2.step(ParamList<double>{{"p", {2}, p2}}, ParamList<double>{{"p", {2}, g2}}, 0.01);
  for (int i = 0; i < 2; ++i) CHECK(relative_error(p1[size_t(i)], p2[size_t(i)]) < 1e-3);
}

TEST_CASE("gradcheck closed forms") {
  std::vector<double> x = {3.0}, g = {6.0};
  ParamList<double> p = {{"x", {1}, x}}, gp = {{"x", {1}, g}};
  CHECK(gradcheck([&] { return x[0] * x[0]; }, p, gp, {}).max_rel_err < 1e-9);
  g[0] = 0.0;
  CHECK(gradcheck([] { return 4.0; }, p, gp, {}).max_rel_err == 0.0);
}

TEST_CASE("identity start with target equal to input has zero loss") {
  const auto img = synthetic_image(16, 16, 9);
  TrainConfig tc;
  tc.iters = 3;
  tc.pipeline.grid_ratio = 8;
  tc.seed = 3;
  const auto r = train_toy(img, img, tc);
  CHECK(r.trace.front().mse < 1e-12);
  CHECK(r.trace.front().total < 1e-9);
}
