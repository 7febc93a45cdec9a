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

#include <benchmark/benchmark.h>

#include <random>

#include "bpam/guidance.hpp"
#include "bpam/losses.hpp"
#include "bpam/optim.hpp"
#include "bpam/pipeline.hpp"
#include "bpam/slicing.hpp"

namespace {

using namespace bpam;

template <class T>
ImageT<T> noise(int h, int w, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  ImageT<T> img(h, w, c);
  for (T& v : img.values()) v = static_cast<T>(d(rng));
  return img;
}

void set_pixels(benchmark::State& state, long pixels) {
  state.SetItemsProcessed(state.iterations() * pixels);
  state.counters["Mpx/s"] = benchmark::Counter(static_cast<double>(pixels), benchmark::Counter::kIsIterationInvariantRate,
                                               benchmark::Counter::kIs1000);
}

// Enhancer end to end; args: width, height, decomposed.
void BM_Enhance(benchmark::State& state) {
  const int W = static_cast<int>(state.range(0)), H = static_cast<int>(state.range(1));
  PipelineConfig cfg;
  cfg.decomposed = state.range(2) != 0;
  const auto m = Model::random(cfg, geometry_for_ratio(H, W, cfg.grid_ratio, cfg.depth), 1);
  const Enhancer e(m);
  const auto img = noise<float>(H, W, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(e.run(img));
  set_pixels(state, long(W) * H);
}
BENCHMARK(BM_Enhance)->Args({512, 512, 1})->Args({1920, 1080, 1})->Args({1920, 1080, 0})->Unit(benchmark::kMillisecond);

void BM_EnhanceAffine(benchmark::State& state) {
  const int W = 1920, H = 1080;
  PipelineConfig cfg;
  cfg.mode = TransformMode::kAffine;
  const auto m = Model::random(cfg, geometry_for_ratio(H, W, cfg.grid_ratio, cfg.depth), 1);
  const Enhancer e(m);
  const auto img = noise<float>(H, W, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(e.run(img));
  set_pixels(state, long(W) * H);
}
BENCHMARK(BM_EnhanceAffine)->Unit(benchmark::kMillisecond);

// Generic slicing of a 32-parameter grid with multi-channel routing.
void BM_Slice(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  const auto geom = geometry_for_ratio(S, S, 8, 8);
  BilateralGrid grid(geom, 32);
  std::mt19937 rng(3);
  for (float& v : grid.values()) v = std::uniform_real_distribution<float>(-1, 1)(rng);
  const auto routing = SlotRouting::decomposed(GridKind::kStage1);
  const auto guide = noise<float>(S, S, routing.channels, 4);
  for (auto _ : state) benchmark::DoNotOptimize(slice(grid, guide, routing));
  set_pixels(state, long(S) * S);
}
BENCHMARK(BM_Slice)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_SliceBackward(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  const auto geom = geometry_for_ratio(S, S, 8, 8);
  BilateralGrid grid(geom, 32, 0.5f);
  const auto routing = SlotRouting::decomposed(GridKind::kStage1);
  const auto guide = noise<float>(S, S, routing.channels, 4);
  const auto up = noise<float>(S, S, 32, 5);
  for (auto _ : state) benchmark::DoNotOptimize(slice_backward(grid, guide, up, routing));
  set_pixels(state, long(S) * S);
}
BENCHMARK(BM_SliceBackward)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Guidance(benchmark::State& state) {
  const int in = static_cast<int>(state.range(0)), out = static_cast<int>(state.range(1));
  const auto net = GuidanceNet::create(in, out, 6);
  const auto img = noise<float>(512, 512, in, 7);
  for (auto _ : state) benchmark::DoNotOptimize(guidance_forward(net, img));
  set_pixels(state, 512L * 512);
}
BENCHMARK(BM_Guidance)->Args({3, 4})->Args({8, 9})->Unit(benchmark::kMillisecond);

// One training step's worth of work: forward, loss, backward.
void BM_TrainStep(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  PipelineConfig cfg;
  const auto m = ModelT<float>::random(cfg, geometry_for_ratio(S, S, 8, 8), 8);
  const auto img = noise<float>(S, S, 3, 9);
  const auto target = noise<float>(S, S, 3, 10);
  for (auto _ : state) {
    const auto c = pipeline_forward(m, img);
    const auto l = total_loss(c.output, target, LossWeights{});
    benchmark::DoNotOptimize(pipeline_backward(m, c, l.grad));
  }
  set_pixels(state, long(S) * S);
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SsimLoss(benchmark::State& state) {
  const auto a = noise<double>(256, 256, 3, 11), b = noise<double>(256, 256, 3, 12);
  for (auto _ : state) benchmark::DoNotOptimize(ssim_loss(a, b));
  set_pixels(state, 256L * 256);
}
BENCHMARK(BM_SsimLoss)->Unit(benchmark::kMillisecond);

void BM_AdamStep(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  std::vector<float> x(n, 0.5f), g(n, 0.01f);
  AdamState adam;
  const ParamList<float> p = {{"x", {static_cast<std::uint32_t>(n)}, x}};
  const ParamList<float> gp = {{"x", {static_cast<std::uint32_t>(n)}, g}};
  for (auto _ : state) adam.step(p, gp, 1e-4);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_AdamStep)->Arg(1 << 16);

}  // namespace

BENCHMARK_MAIN();
