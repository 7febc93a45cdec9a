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

#include "bpam/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <random>

#include "bpam/errors.hpp"

namespace bpam {
namespace {

Image noise_image(int height, int width, std::uint64_t seed) {
  Image img(height, width, kColorChannels);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  for (float& v : img.values()) v = uni(rng);
  return img;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  if (config.iterations <= 0 || config.warmup < 0) throw ConfigError("bench: iterations must be positive");
  std::vector<BenchRow> rows;
  for (const auto& [w, h] : config.resolutions) {
    const PipelineConfig& pcfg = config.pipeline;
    const GridGeometry geom = geometry_for_ratio(h, w, pcfg.grid_ratio, pcfg.depth, pcfg.align_centers);
    const Enhancer enhancer(Model::random(pcfg, geom, config.seed, 0.1, 1.0));
    const Image img = noise_image(h, w, config.seed + 1);

    for (int i = 0; i < config.warmup; ++i) enhancer.run(img);
    constexpr int kStages = 6;
    double sum[kStages] = {}, best[kStages];
    std::fill(best, best + kStages, std::numeric_limits<double>::infinity());
    for (int i = 0; i < config.iterations; ++i) {
      StageTimings t;
      enhancer.run(img, &t);
      const double v[kStages] = {t.guidance_ms, t.slice1_ms, t.mlp1_ms, t.slice2_ms, t.mlp2_ms, t.total_ms};
      for (int s = 0; s < kStages; ++s) {
        sum[s] += v[s];
        best[s] = std::min(best[s], v[s]);
      }
    }
    static const char* names[kStages] = {"guidance", "slice1", "mlp1", "slice2", "mlp2", "total"};
    for (int s = 0; s < kStages; ++s) {
      BenchRow r;
      r.width = w;
      r.height = h;
      r.stage = names[s];
      r.iterations = config.iterations;
      r.mean_ms = sum[s] / config.iterations;
      r.min_ms = best[s];
      r.fps = r.mean_ms > 0 ? 1000.0 / r.mean_ms : 0.0;
      rows.push_back(r);
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "width,height,stage,iterations,mean_ms,min_ms,fps\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%s,%d,%.4f,%.4f,%.3f\n", r.width, r.height, r.stage.c_str(), r.iterations,
                  r.mean_ms, r.min_ms, r.fps);
    out += buf;
  }
  return out;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-11s %-9s %12s %12s %10s\n", "resolution", "stage", "mean (ms)", "min (ms)", "FPS");
  out += buf;
  for (const auto& r : rows) {
    const std::string res = std::to_string(r.width) + "x" + std::to_string(r.height);
    std::snprintf(buf, sizeof buf, "%-11s %-9s %12.3f %12.3f %10.2f\n", res.c_str(), r.stage.c_str(), r.mean_ms,
                  r.min_ms, r.fps);
    out += buf;
  }
  return out;
}

}  // namespace bpam
