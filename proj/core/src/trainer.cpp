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

#include "bpam/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "bpam/errors.hpp"
#include "bpam/metrics.hpp"
#include "bpam/resample.hpp"

namespace bpam {

std::string to_string(TrainMode mode) { return mode == TrainMode::kProducer ? "producer" : "direct"; }

TrainMode parse_train_mode(const std::string& s) {
  if (s == "direct" || s == "direct-grids") return TrainMode::kDirectGrids;
  if (s == "producer") return TrainMode::kProducer;
  throw ArgumentError("unknown training mode '" + s + "' (expected direct or producer)");
}

namespace {

template <class T>
LossRecord record(long step, double lr, const TotalLoss<T>& loss) {
  return {step, lr, loss.mse, loss.ssim, loss.total};
}

void check_finite(const LossRecord& r) {
  if (!std::isfinite(r.total))
    throw TrainingError("training diverged: non-finite loss at step " + std::to_string(r.step), r.step);
}

template <class T>
void append(ParamList<T>& to, ParamList<T> from) {
  for (auto& p : from) to.push_back(std::move(p));
}

}  // namespace

template <class T>
TrainResultT<T> train_toy(const ImageT<T>& input, const ImageT<T>& target, const TrainConfig& config,
                          const ModelT<T>* init) {
  if (!input.same_shape(target)) throw ArgumentError("train: input and target shapes differ");
  if (input.channels() != kColorChannels) throw ArgumentError("train: images must have 3 channels");
  if (config.iters < 0) throw ConfigError("train: iteration count must be non-negative");
  const Schedule sched{config.lr_max, config.lr_min, std::max(1L, config.iters)};
  sched.validate();
  const PipelineConfig& pcfg = config.pipeline;

  TrainResultT<T> res;
  AdamState adam(config.adam);
  const PerceptualHook<T> no_hook;

  if (config.mode == TrainMode::kDirectGrids) {
    const GridGeometry geom =
        geometry_for_ratio(input.height(), input.width(), pcfg.grid_ratio, pcfg.depth, pcfg.align_centers);
    if (init) {
      res.model = *init;
      res.model.validate();
      if (res.model.grids.front().geometry() != geom)
        throw ArgumentError("train: initial model geometry does not match the input image and grid ratio");
    } else {
      res.model = ModelT<T>::identity(pcfg, geom, config.seed);
    }
    for (long step = 0; step <= config.iters; ++step) {
      const double lr = cosine_lr(sched, step);
      const ForwardCache<T> cache = pipeline_forward(res.model, input);
      const TotalLoss<T> loss = total_loss(cache.output, target, config.loss, no_hook);
      res.trace.push_back(record(step, lr, loss));
      check_finite(res.trace.back());
      if (step == config.iters) break;
      ModelT<T> grads = pipeline_backward(res.model, cache, loss.grad);
      adam.step(res.model.parameters(), grads.parameters(), lr);
    }
    return res;
  }

  if (init) throw ConfigError("train: an initial model is only supported in direct-grids mode");
  const ProducerPlan plan = producer_plan_for_ratio(pcfg.grid_ratio, pcfg.depth);
  ProducerConfig prod = plan.config;
  prod.heads = grid_kinds(pcfg);
  const ImageT<T> lowres = plan.downsample > 1 ? downsample(input, plan.downsample) : input;
  const auto [gh, gw] = producer_grid_dims(prod, lowres.height(), lowres.width());
  const GridGeometry geom{gh, gw, pcfg.depth, input.height(), input.width(), pcfg.align_centers, 255.0};
  geom.validate();
  res.downsample = plan.downsample;
  res.producer = ProducerNetT<T>::create(prod, config.seed);
  res.model = ModelT<T>::identity(pcfg, geom, config.seed + 1);
  ProducerNetT<T>& net = *res.producer;
  for (long step = 0; step <= config.iters; ++step) {
    const double lr = cosine_lr(sched, step);
    res.model.grids = produce_grids(net, lowres, geom);
    const ForwardCache<T> cache = pipeline_forward(res.model, input);
    const TotalLoss<T> loss = total_loss(cache.output, target, config.loss, no_hook);
    res.trace.push_back(record(step, lr, loss));
    check_finite(res.trace.back());
    if (step == config.iters) break;
    ModelT<T> grads = pipeline_backward(res.model, cache, loss.grad);
    ProducerNetT<T> pgrads = producer_backward(net, lowres, geom, grads.grids);
    ParamList<T> params = net.parameters();
    append(params, res.model.guidance_parameters());
    ParamList<T> gparams = pgrads.parameters();
    append(gparams, grads.guidance_parameters());
    adam.step(params, gparams, lr);
  }
  return res;
}

std::string loss_trace_csv(const std::vector<LossRecord>& trace) {
  std::string out = "step,lr,mse,ssim,total\n";
  char buf[160];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%ld,%.9g,%.9g,%.9g,%.9g\n", r.step, r.lr, r.mse, r.ssim, r.total);
    out += buf;
  }
  return out;
}

Image synthetic_image(int height, int width, std::uint64_t seed) {
  if (height <= 0 || width <= 0) throw ArgumentError("synthetic_image: dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double fx[3][2], fy[3][2], ph[3][2];
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 2; ++k) {
      fx[c][k] = 0.5 + 2.5 * uni(rng);
      fy[c][k] = 0.5 + 2.5 * uni(rng);
      ph[c][k] = 6.283185307179586 * uni(rng);
    }
  struct Disc {
    double cx, cy, r, col[3];
  };
  std::vector<Disc> discs(4);
  for (auto& d : discs) {
    d.cx = uni(rng);
    d.cy = uni(rng);
    d.r = 0.08 + 0.15 * uni(rng);
    for (double& v : d.col) v = 0.1 + 0.8 * uni(rng);
  }
  Image img(height, width, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width, v = (y + 0.5) / height;
      for (int c = 0; c < 3; ++c) {
        double s = 0.5;
        for (int k = 0; k < 2; ++k) s += 0.2 * std::sin(6.283185307179586 * (fx[c][k] * u + fy[c][k] * v) + ph[c][k]);
        for (const auto& d : discs)
          if ((u - d.cx) * (u - d.cx) + (v - d.cy) * (v - d.cy) < d.r * d.r) s = 0.5 * s + 0.5 * d.col[c];
        img.at(y, x, c) = static_cast<float>(std::clamp(s, 0.02, 0.98));
      }
    }
  return img;
}

RecoveryResult run_recovery(const RecoveryConfig& config) {
  const TrainConfig& tc = config.train;
  if (tc.mode != TrainMode::kDirectGrids) throw ConfigError("recovery runs in direct-grids mode");
  const Image input = synthetic_image(config.size, config.size, tc.seed);
  const PipelineConfig& pcfg = tc.pipeline;
  const GridGeometry geom = geometry_for_ratio(config.size, config.size, pcfg.grid_ratio, pcfg.depth, pcfg.align_centers);
  const Model truth = Model::random(pcfg, geom, tc.seed + 1000, config.truth_grid_noise, config.truth_net_scale);
  const Image target = pipeline_forward(truth, input).output;

  RecoveryResult out;
  out.result = train_toy(input, target, tc);
  out.initial_psnr = psnr(input, target);
  out.psnr = psnr(pipeline_forward(out.result.model, input).output, target);
  return out;
}

template TrainResultT<float> train_toy(const ImageT<float>&, const ImageT<float>&, const TrainConfig&,
                                       const ModelT<float>*);
template TrainResultT<double> train_toy(const ImageT<double>&, const ImageT<double>&, const TrainConfig&,
                                        const ModelT<double>*);

}  // namespace bpam
