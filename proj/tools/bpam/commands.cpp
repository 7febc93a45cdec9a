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

#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "bpam/atomic_file.hpp"
#include "bpam/bench.hpp"
#include "bpam/errors.hpp"
#include "bpam/gradcheck.hpp"
#include "bpam/image_io.hpp"
#include "bpam/metrics.hpp"
#include "bpam/model_io.hpp"
#include "bpam/parallel.hpp"

namespace bpam::cli {
namespace fs = std::filesystem;

PipelineConfig RunConfig::pipeline(int default_depth) const {
  PipelineConfig cfg;
  cfg.mode = parse_mode(mode);
  cfg.decomposed = decomposed == "on";
  cfg.grid_ratio = grid_ratio;
  cfg.depth = depth.value_or(default_depth);
  cfg.align_centers = align_centers == "on";
  return cfg;
}

namespace {

using Clock = std::chrono::steady_clock;

bool require(const std::string& value, const char* flag) {
  if (!value.empty()) return true;
  std::cerr << "error: " << flag << " is required\n";
  return false;
}

// Returns false (after printing) when an input file is missing.
bool exists(const std::string& path, const char* what) {
  if (fs::exists(path)) return true;
  std::cerr << "error: " << what << " not found: " << path << "\n";
  return false;
}

void print_timings(const StageTimings& t) {
  std::printf("%-9s %10s\n", "stage", "ms");
  std::printf("%-9s %10.3f\n", "guidance", t.guidance_ms);
  std::printf("%-9s %10.3f\n", "slice1", t.slice1_ms);
  std::printf("%-9s %10.3f\n", "mlp1", t.mlp1_ms);
  std::printf("%-9s %10.3f\n", "slice2", t.slice2_ms);
  std::printf("%-9s %10.3f\n", "mlp2", t.mlp2_ms);
  std::printf("%-9s %10.3f\n", "total", t.total_ms);
}

std::pair<int, int> parse_resolution(const std::string& s) {
  int w = 0, h = 0;
  char sep = 0;
  std::istringstream in(s);
  if (!(in >> w >> sep >> h) || (sep != 'x' && sep != 'X') || w <= 0 || h <= 0 || !in.eof())
    throw ArgumentError("resolution '" + s + "' is not WIDTHxHEIGHT");
  return {w, h};
}

}  // namespace

int cmd_init(const RunConfig& rc, const InitOptions& opt) {
  if (!require(rc.grids, "--grids") || !require(rc.weights, "--weights")) return kExitFailure;
  int w = opt.width, h = opt.height;
  if (!rc.input.empty()) {
    if (!exists(rc.input, "input image")) return kExitMissingFile;
    const Image img = load_image(rc.input);
    w = img.width();
    h = img.height();
  }
  if (w <= 0 || h <= 0) {
    std::cerr << "error: give --input or both --width and --height\n";
    return kExitFailure;
  }
  const PipelineConfig cfg = rc.pipeline();
  const GridGeometry geom = geometry_for_ratio(h, w, cfg.grid_ratio, cfg.depth, cfg.align_centers);
  Model model = Model::identity(cfg, geom, rc.seed.value_or(0));
  save_model(model, rc.grids, rc.weights);
  std::printf("wrote %s (%zu grids, %dx%dx%d) and %s\n", rc.grids.c_str(), model.grids.size(), geom.grid_h,
              geom.grid_w, geom.depth, rc.weights.c_str());
  return kExitOk;
}

int cmd_enhance(const RunConfig& rc, const EnhanceOptions& opt) {
  if (!require(rc.input, "--input") || !require(rc.grids, "--grids") || !require(rc.out, "--out"))
    return kExitFailure;
  if (!exists(rc.input, "input image") || !exists(rc.grids, "grid file")) return kExitMissingFile;
  if (!rc.weights.empty() && !exists(rc.weights, "weights file")) return kExitMissingFile;

  const Image img = load_image(rc.input);
  const std::optional<fs::path> weights = rc.weights.empty() ? std::nullopt : std::optional<fs::path>(rc.weights);
  const Model model = load_model(rc.grids, weights, rc.pipeline(), rc.seed.value_or(0));
  const GridGeometry& geom = model.grids.front().geometry();
  if (geom.image_h != img.height() || geom.image_w != img.width()) {
    std::cerr << "error: grids in " << rc.grids << " were built for " << geom.image_w << "x" << geom.image_h
              << " images, input is " << img.width() << "x" << img.height() << "\n";
    return kExitFailure;
  }

  Image result;
  StageTimings t;
  if (rc.precision.value_or(32) == 64) {
    const auto t0 = Clock::now();
    result = image_cast<float>(pipeline_forward(model_cast<double>(model), image_cast<double>(img)).output);
    t.total_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  } else {
    const Enhancer enhancer(model);
    result = enhancer.run(img, &t);
  }
  save_image(result, rc.out, opt.bit_depth);
  print_timings(t);
  return kExitOk;
}

int cmd_bench(const RunConfig& rc, const BenchOptions& opt) {
  BenchConfig bc;
  bc.pipeline = rc.pipeline();
  bc.iterations = static_cast<int>(rc.iters.value_or(100));
  bc.warmup = opt.warmup;
  bc.seed = rc.seed.value_or(0);
  if (!opt.resolutions.empty()) {
    bc.resolutions.clear();
    for (const auto& r : opt.resolutions) bc.resolutions.push_back(parse_resolution(r));
  }
  std::printf("threads %d, %d warmup + %d timed runs per resolution\n", num_threads(), bc.warmup, bc.iterations);
  const auto rows = run_bench(bc);
  std::printf("%s", bench_table(rows).c_str());
  if (!rc.out.empty()) write_file_atomic(rc.out, bench_csv(rows));
  else std::printf("\n%s", bench_csv(rows).c_str());
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& rc, const GradcheckCliOptions& opt) {
  if (rc.precision && *rc.precision != 64) {
    std::cerr << "error: gradient checks run in 64-bit precision only\n";
    return kExitFailure;
  }
  PipelineGradcheckConfig cfg;
  cfg.pipeline = rc.pipeline(4);
  cfg.pipeline.clamp_output = false;
  cfg.image_size = opt.image_size;
  cfg.grid_size = opt.grid_size;
  cfg.seed = rc.seed.value_or(0);
  cfg.options.seed = cfg.seed;
  cfg.corrupt_backward = opt.corrupt_backward;
  const auto results = gradcheck_pipeline(cfg);

  bool ok = true;
  const GroupResult* worst = nullptr;
  std::printf("%-9s %7s %8s %12s  %s\n", "group", "probes", "rejected", "max_rel_err", "worst");
  for (const auto& r : results) {
    const auto& rep = r.report;
    std::printf("%-9s %7zu %8zu %12.3e  %s[%zu] analytic=%.9g numeric=%.9g%s%s\n", r.group.c_str(), rep.probes,
                rep.rejected, rep.max_rel_err, rep.worst_param.c_str(), rep.worst_index, rep.worst_analytic,
                rep.worst_numeric, rep.finite ? "" : " ", rep.failure.c_str());
    if (!rep.passed(cfg.options.tolerance) || rep.probes == 0) ok = false;
    if (!worst || rep.max_rel_err > worst->report.max_rel_err || !rep.finite) worst = &r;
  }
  if (ok) {
    std::printf("PASS: %zu groups, max relative error below %.0e\n", results.size(), cfg.options.tolerance);
    return kExitOk;
  }
  std::printf("FAIL: worst group %s, %s[%zu] analytic=%.9g numeric=%.9g rel_err=%.3e\n", worst->group.c_str(),
              worst->report.worst_param.c_str(), worst->report.worst_index, worst->report.worst_analytic,
              worst->report.worst_numeric, worst->report.max_rel_err);
  return kExitFailure;
}

namespace {

template <class T>
TrainResult run_training(const Image& input, const Image& target, const TrainConfig& tc) {
  if constexpr (std::is_same_v<T, float>) {
    return train_toy(input, target, tc);
  } else {
    auto r = train_toy(image_cast<double>(input), image_cast<double>(target), tc);
    TrainResult out;
    out.model = model_cast<float>(r.model);
    if (r.producer) out.producer = producer_cast<float>(*r.producer);
    out.downsample = r.downsample;
    out.trace = std::move(r.trace);
    return out;
  }
}

void write_checkpoint(TrainResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  save_model(r.model, dir / "grids.bpg", dir / "weights.bpt", r.producer ? &*r.producer : nullptr);
  write_file_atomic(dir / "loss.csv", loss_trace_csv(r.trace));
}

}  // namespace

int cmd_train(const RunConfig& rc, const TrainOptions& opt) {
  if (!require(rc.input, "--input") || !require(rc.target, "--target") || !require(rc.out, "--out"))
    return kExitFailure;
  if (!rc.seed) {
    std::cerr << "error: --seed is required for training\n";
    return kExitFailure;
  }
  if (!exists(rc.input, "input image") || !exists(rc.target, "target image")) return kExitMissingFile;
  const Image input = load_image(rc.input);
  const Image target = load_image(rc.target);

  TrainConfig tc;
  tc.pipeline = rc.pipeline();
  tc.mode = parse_train_mode(opt.train_mode);
  tc.iters = rc.iters.value_or(2000);
  tc.lr_max = rc.lr_max;
  tc.lr_min = rc.lr_min;
  tc.seed = *rc.seed;

  TrainResult r;
  try {
    r = rc.precision.value_or(32) == 64 ? run_training<double>(input, target, tc)
                                        : run_training<float>(input, target, tc);
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << "; last finite step " << (e.step() - 1) << "\n";
    return kExitFailure;
  }
  write_checkpoint(r, rc.out);
  const auto& first = r.trace.front();
  const auto& last = r.trace.back();
  std::printf("steps %ld  loss %.6g -> %.6g  (mse %.6g, 1-ssim %.6g)\n", tc.iters, first.total, last.total, last.mse,
              last.ssim);
  std::printf("wrote %s/{grids.bpg,weights.bpt,loss.csv}\n", rc.out.c_str());
  return kExitOk;
}

int cmd_eval(const RunConfig& rc) {
  if (!require(rc.input, "--input") || !require(rc.target, "--target")) return kExitFailure;
  if (!exists(rc.input, "input image") || !exists(rc.target, "target image")) return kExitMissingFile;
  const Image a = load_image(rc.input);
  const Image b = load_image(rc.target);
  const MetricReport m = evaluate(a, b);
  std::printf("psnr    %.4f dB\nssim    %.6f\ndelta_e %.4f\n", m.psnr, m.ssim, m.delta_e);
  if (!rc.out.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "psnr,ssim,delta_e\n%.6f,%.8f,%.6f\n", m.psnr, m.ssim, m.delta_e);
    write_file_atomic(rc.out, buf);
  }
  return kExitOk;
}

int cmd_recover(const RunConfig& rc, const RecoverOptions& opt) {
  RecoveryConfig cfg;
  cfg.size = opt.size;
  cfg.train.pipeline = rc.pipeline();
  cfg.train.iters = rc.iters.value_or(2000);
  cfg.train.lr_max = rc.lr_max;
  cfg.train.lr_min = rc.lr_min;
  cfg.train.seed = rc.seed.value_or(0);
  const auto t0 = Clock::now();
  RecoveryResult r = run_recovery(cfg);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const auto& trace = r.result.trace;
  const size_t mid = std::min<size_t>(500, trace.size() - 1);
  std::printf("seed %llu, %ld steps in %.1f s\n", static_cast<unsigned long long>(cfg.train.seed), cfg.train.iters,
              secs);
  std::printf("psnr(input, target)   %.2f dB\npsnr(output, target)  %.2f dB\n", r.initial_psnr, r.psnr);
  std::printf("loss@0 %.6g  loss@%zu %.6g  final %.6g\n", trace.front().total, mid, trace[mid].total,
              trace.back().total);
  if (!rc.out.empty()) write_checkpoint(r.result, rc.out);
  return r.psnr > opt.min_psnr ? kExitOk : kExitFailure;
}

}  // namespace bpam::cli
