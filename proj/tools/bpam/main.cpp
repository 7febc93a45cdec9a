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

#include <cstdlib>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "bpam/errors.hpp"
#include "bpam/parallel.hpp"
#include "commands.hpp"
#include "json_config.hpp"

namespace {

int threads_from_env() {
  const char* v = std::getenv("BPAM_THREADS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) {
    std::cerr << "warning: ignoring invalid BPAM_THREADS='" << v << "'\n";
    return 0;
  }
  return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bpam::cli;
  CLI::App app{"Bilateral-grid pixel-adaptive MLP image enhancement"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file of option values; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunConfig rc;
  const auto on_off = CLI::IsMember({"on", "off"});
  app.add_option("--input", rc.input, "Input PNG");
  app.add_option("--target", rc.target, "Target PNG");
  app.add_option("--out", rc.out, "Output file or directory");
  app.add_option("--grids", rc.grids, "Grid container (BPG1)");
  app.add_option("--weights", rc.weights, "Tensor container (BPT1) with guidance nets");
  app.add_option("--mode", rc.mode, "Per-pixel transform")->check(CLI::IsMember({"affine", "mlp"}));
  app.add_option("--decomposed", rc.decomposed, "Decomposed subgrid slicing")->check(on_off);
  app.add_option("--grid-ratio", rc.grid_ratio, "Grid size as 1/ratio of the image")->check(CLI::IsMember({4, 8, 32}));
  app.add_option("--depth", rc.depth, "Grid intensity bins")->check(CLI::Range(1, 64));
  app.add_option("--align-centers", rc.align_centers, "Pixel-center grid alignment")->check(on_off);
  auto* threads = app.add_option("--threads", rc.threads, "Worker threads (0: hardware concurrency)")
                      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", rc.seed, "Random seed");
  app.add_option("--iters", rc.iters, "Training steps or benchmark iterations")->check(CLI::NonNegativeNumber);
  app.add_option("--lr-max", rc.lr_max, "Initial learning rate")->check(CLI::PositiveNumber);
  app.add_option("--lr-min", rc.lr_min, "Final learning rate")->check(CLI::PositiveNumber);
  app.add_option("--precision", rc.precision, "Numeric precision in bits")->check(CLI::IsMember({32, 64}));

  InitOptions init_opt;
  auto* init = app.add_subcommand("init", "Write identity grids and fresh guidance nets for an image size");
  init->add_option("--width", init_opt.width, "Image width (default: from --input)");
  init->add_option("--height", init_opt.height, "Image height (default: from --input)");

  EnhanceOptions enh_opt;
  auto* enhance = app.add_subcommand("enhance", "Enhance an image with stored grids and guidance nets");
  enhance->add_option("--bit-depth", enh_opt.bit_depth, "Output PNG bit depth")->check(CLI::IsMember({8, 16}));

  BenchOptions bench_opt;
  auto* bench = app.add_subcommand("bench", "Time the inference stages on synthetic frames");
  bench->add_option("--resolution", bench_opt.resolutions, "WIDTHxHEIGHT, repeatable (default 1920x1080 3840x2160)");
  bench->add_option("--warmup", bench_opt.warmup, "Untimed runs before measuring")->check(CLI::NonNegativeNumber);

  GradcheckCliOptions gc_opt;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every analytic gradient");
  gradcheck->add_option("--image-size", gc_opt.image_size, "Square test image size");
  gradcheck->add_option("--grid-size", gc_opt.grid_size, "Square grid size");
  gradcheck->add_flag("--corrupt-backward", gc_opt.corrupt_backward, "Test fixture: perturb one analytic gradient");

  TrainOptions train_opt;
  auto* train = app.add_subcommand("train", "Fit grids (or a producer) and guidance nets to one image pair");
  train->add_option("--train-mode", train_opt.train_mode, "Free grids or producer network")
      ->check(CLI::IsMember({"direct", "producer"}));

  auto* eval = app.add_subcommand("eval", "PSNR, SSIM and CIE76 color difference of an image pair");

  RecoverOptions rec_opt;
  auto* recover = app.add_subcommand("recover", "Self-consistency experiment: fit a synthetic random model");
  recover->add_option("--size", rec_opt.size, "Square image size");
  recover->add_option("--min-psnr", rec_opt.min_psnr, "Exit non-zero below this PSNR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  bpam::set_num_threads(threads->count() > 0 ? rc.threads : threads_from_env());

  try {
    if (*init) return cmd_init(rc, init_opt);
    if (*enhance) return cmd_enhance(rc, enh_opt);
    if (*bench) return cmd_bench(rc, bench_opt);
    if (*gradcheck) return cmd_gradcheck(rc, gc_opt);
    if (*train) return cmd_train(rc, train_opt);
    if (*eval) return cmd_eval(rc);
    if (*recover) return cmd_recover(rc, rec_opt);
  } catch (const bpam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
