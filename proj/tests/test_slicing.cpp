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

#include <random>

#include "bpam/errors.hpp"
#include "bpam/parallel.hpp"
#include "bpam/slicing.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace bpam;

namespace {

GridGeometry random_geometry(std::mt19937_64& rng, int max_img = 32) {
  GridGeometry g;
  g.grid_h = 1 + int(rng() % 8);
  g.grid_w = 1 + int(rng() % 8);
  g.depth = 1 + int(rng() % 8);
  g.image_h = g.grid_h + int(rng() % unsigned(max_img - g.grid_h + 1));
  g.image_w = g.grid_w + int(rng() % unsigned(max_img - g.grid_w + 1));
  g.align_centers = rng() % 2;
  return g;
}

}  // namespace

TEST_CASE("trilinear weights sum to one") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto w = trilinear_weights(d(rng), d(rng), d(rng));
    double s = 0;
    for (double v : w) s += v;
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  const auto c = trilinear_weights(0, 0, 0);
  CHECK(c[0] == 1.0);
}

TEST_CASE("split_frac clamps at both ends") {
  CHECK(split_frac<double>(-0.3, 4).index == 0);
  CHECK(split_frac<double>(-0.3, 4).frac == 0.0);
  CHECK(split_frac<double>(3.0, 4).index == 3);
  CHECK(split_frac<double>(3.7, 4).frac == 0.0);
  CHECK(split_frac<double>(1.25, 4).index == 1);
  CHECK(split_frac<double>(1.25, 4).frac == doctest::Approx(0.25));
  CHECK(split_frac<double>(0.5, 1).index == 0);
}

TEST_CASE("lift maps guidance to [0, depth - 1]") {
  GridGeometry g;
  g.grid_h = 2;
  g.grid_w = 4;
  g.depth = 8;
  g.image_h = 8;
  g.image_w = 16;
  auto c = lift(0, 0, 1.0, g);
  CHECK(c.r == 7.0);
  CHECK(c.u == doctest::Approx(-0.375));
  c = lift(0, 0, 1.5, g);
  CHECK(c.guidance_clamped);
  CHECK(c.r == 7.0);
  g.align_centers = false;
  CHECK(lift(8, 4, 0.0, g).u == 2.0);
}

TEST_CASE("slice matches the triple-loop oracle") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = random_geometry(rng);
    const int P = 1 + int(rng() % 32);
    const auto grid = testutil::random_grid<float>(g, P, rng());
    const auto guide = testutil::random_image(g.image_h, g.image_w, 1, rng(), -0.1, 1.1);
    const auto fast = slice(grid, guide);
    const auto ref = oracle::slice(grid, guide);
    CHECK(testutil::max_abs_diff(fast, ref) < 1e-6);
  }
}

TEST_CASE("slice with multi-channel routing matches the oracle") {
  std::mt19937_64 rng(7);
  for (GridKind k : {GridKind::kStage1, GridKind::kStage2, GridKind::kAffine}) {
    const auto g = random_geometry(rng, 20);
    const auto routing = SlotRouting::decomposed(k);
    const auto grid = testutil::random_grid<double>(g, params_per_cell(k), rng());
    const auto guide = testutil::random_image<double>(g.image_h, g.image_w, routing.channels, rng());
    const auto fast = slice(grid, guide, routing);
    CHECK(testutil::max_abs_diff(fast, oracle::slice(grid, guide, routing.slot_channel)) < 1e-12);
  }
}

TEST_CASE("slice_decomposed with equal guidance matches monolithic slicing") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_geometry(rng, 24);
    const GridKind k = trial % 3 == 0 ? GridKind::kStage1 : trial % 3 == 1 ? GridKind::kStage2 : GridKind::kAffine;
    const auto grid = testutil::random_grid<float>(g, params_per_cell(k), rng());
    const auto set = decompose(grid, k);
    const auto g1 = testutil::random_image(g.image_h, g.image_w, 1, rng());
    Image gk(g.image_h, g.image_w, int(set.subgrids.size()));
    for (int y = 0; y < g.image_h; ++y)
      for (int x = 0; x < g.image_w; ++x)
        for (int c = 0; c < gk.channels(); ++c) gk.at(y, x, c) = g1.at(y, x);
    CHECK(testutil::max_abs_diff(slice_decomposed(set, gk), slice(recompose(set), g1)) < 1e-5);
  }
}

TEST_CASE("slice_backward is the adjoint of slice") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_geometry(rng, 9);
    const int P = 1 + int(rng() % 5);
    const auto grid = testutil::random_grid<double>(g, P, rng());
    const auto guide = testutil::random_image<double>(g.image_h, g.image_w, 1, rng(), 0.02, 0.98);
    const auto up = testutil::random_image<double>(g.image_h, g.image_w, P, rng(), -1, 1);
    const auto grads = slice_backward(grid, guide, up);
    auto objective = [&](const BilateralGridT<double>& gr, const ImageD& gd) {
      const auto s = slice(gr, gd);
      double acc = 0;
      for (size_t i = 0; i < s.size(); ++i) acc += s.values()[i] * up.values()[i];
      return acc;
    };
    // Linear in the grid: unit perturbations give the exact gradient.
    for (size_t i = 0; i < grid.size(); i += 1 + grid.size() / 17) {
      auto gp = grid;
      gp.values()[i] += 1.0;
      CHECK(objective(gp, guide) - objective(grid, guide) == doctest::Approx(grads.grid.values()[i]).epsilon(1e-9));
    }
    const double h = 1e-7;
    for (size_t i = 0; i < guide.size(); i += 1 + guide.size() / 13) {
      auto a = guide, b = guide;
      a.values()[i] += h;
      b.values()[i] -= h;
      const double r = guide.values()[i] * (g.depth - 1);
      if (std::abs(r - std::round(r)) < 1e-5) continue;
      const double num = (objective(grid, a) - objective(grid, b)) / (2 * h);
      CHECK(num == doctest::Approx(grads.guidance.values()[i]).epsilon(1e-5).scale(1e-6));
    }
  }
}

TEST_CASE("slice_backward does not depend on the thread count") {
  GridGeometry g;
  g.grid_h = 3;
  g.grid_w = 3;
  g.depth = 4;
  g.image_h = 40;
  g.image_w = 33;
  const auto grid = testutil::random_grid<float>(g, 6, 1);
  const auto guide = testutil::random_image(40, 33, 1, 2);
  const auto up = testutil::random_image(40, 33, 6, 3, -1, 1);
  set_num_threads(1);
  const auto a = slice_backward(grid, guide, up);
  set_num_threads(3);
  const auto b = slice_backward(grid, guide, up);
  set_num_threads(0);
  CHECK(a.grid == b.grid);
  CHECK(a.guidance == b.guidance);
}

TEST_CASE("slice rejects mismatched guidance") {
  GridGeometry g;
  g.image_h = 4;
  g.image_w = 4;
  BilateralGrid grid(g, 3);
  CHECK_THROWS_AS(slice(grid, Image(4, 5, 1)), ArgumentError);
  CHECK_THROWS_AS(slice(grid, Image(4, 4, 2), SlotRouting::monolithic(3)), ArgumentError);
}
