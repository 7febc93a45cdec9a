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
#include "bpam/optim.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace bpam;

TEST_CASE("adam matches the textbook update") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0, 1);
  std::vector<double> x(10), g(10);
  for (double& v : x) v = nd(rng);
  std::vector<float> xf(x.begin(), x.end());
  std::vector<double> ref = x;
  AdamState state;
  oracle::Adam o;
  std::vector<float> gf(10);
  for (int t = 0; t < 50; ++t) {
    for (size_t i = 0; i < g.size(); ++i) g[i] = nd(rng) * (i + 1);
    for (size_t i = 0; i < g.size(); ++i) gf[i] = float(g[i]);
    std::vector<double> gr(gf.begin(), gf.end());
    const double lr = 1e-2 / (1 + t);
    o.step(ref, gr, lr);
    ParamList<float> p = {{"x", {10}, xf}}, gp = {{"x", {10}, gf}};
    adam_step(state, p, gp, lr);
  }
  CHECK(state.step_count() == 50);
  for (size_t i = 0; i < x.size(); ++i) CHECK(xf[i] == doctest::Approx(ref[i]).epsilon(1e-6));
  REQUIRE(state.moments("x") != nullptr);
  CHECK(state.moments("x")->m.size() == 10);
  CHECK(state.moments("y") == nullptr);
}

TEST_CASE("adam first step moves each parameter by about lr") {
  std::vector<double> x = {1.0, -2.0, 3.0}, g = {0.5, -7.0, 1e-3};
  AdamState s;
  s.step(ParamList<double>{{"x", {3}, x}}, ParamList<double>{{"x", {3}, g}}, 0.1);
  CHECK(x[0] == doctest::Approx(0.9));
  CHECK(x[1] == doctest::Approx(-1.9));
  CHECK(x[2] == doctest::Approx(2.9).epsilon(1e-4));
}

TEST_CASE("adam rejects non-finite gradients without moving anything") {
  std::vector<double> a = {1.0, 2.0}, b = {3.0}, ga = {0.1, 0.2}, gb = {std::nan("")};
  AdamState s;
  ParamList<double> p = {{"a", {2}, a}, {"b", {1}, b}}, g = {{"a", {2}, ga}, {"b", {1}, gb}};
  try {
    s.step(p, g, 0.1);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  CHECK(a[0] == 1.0);
  CHECK(s.step_count() == 0);
  std::vector<double> short_g = {0.1};
  CHECK_THROWS_AS(s.step(ParamList<double>{{"a", {2}, a}}, ParamList<double>{{"a", {1}, short_g}}, 0.1),
                  ArgumentError);
}

TEST_CASE("cosine schedule endpoints and midpoint") {
  Schedule s;
  CHECK(cosine_lr(s, 0) == doctest::Approx(3e-4));
  CHECK(cosine_lr(s, 2000) == doctest::Approx(4e-6));
  CHECK(cosine_lr(s, 5000) == doctest::Approx(4e-6));
  CHECK(cosine_lr(s, 1000) == doctest::Approx((3e-4 + 4e-6) / 2));
  for (long t = 0; t <= 2000; t += 37) CHECK(cosine_lr(s, t) == doctest::Approx(oracle::cosine(3e-4, 4e-6, t, 2000)));
  for (long t = 1; t <= 2000; ++t) CHECK(cosine_lr(s, t) <= cosine_lr(s, t - 1));
  s.lr_min = 1e-3;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = Schedule{};
  s.total_steps = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}
