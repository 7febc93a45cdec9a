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

#include "bpam/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "bpam/errors.hpp"
#include "bpam/producer.hpp"

namespace bpam {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradcheckReport gradcheck(const std::function<double()>& objective, const ParamList<double>& params,
                          const ParamList<double>& grads, const GradcheckOptions& options,
                          const std::function<std::uint64_t()>& regime) {
  if (params.size() != grads.size()) throw ArgumentError("gradcheck: parameter and gradient lists differ in length");
  if (!(options.h > 0)) throw ArgumentError("gradcheck: step must be positive");
  GradcheckReport rep;
  std::mt19937_64 rng(options.seed);
  const std::uint64_t base_regime = regime ? regime() : 0;
  auto fail = [&](const std::string& what) {
    if (rep.finite) rep.failure = what;
    rep.finite = false;
  };
  for (size_t t = 0; t < params.size(); ++t) {
    const auto& p = params[t];
    const auto& g = grads[t];
    if (p.values.size() != g.values.size())
      throw ArgumentError("gradcheck: gradient '" + g.name + "' does not match parameter '" + p.name + "'");
    std::vector<size_t> idx(p.values.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    const size_t want = std::min(idx.size(), static_cast<size_t>(std::max(1, options.probes_per_tensor)));
    if (want < idx.size()) {
      for (size_t i = 0; i < want; ++i) {
        std::uniform_int_distribution<size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
      }
      idx.resize(want);
      std::sort(idx.begin(), idx.end());
    }
    for (size_t k : idx) {
      double& v = p.values[k];
      const double saved = v;
      v = saved + options.h;
      const double fp = objective();
      const bool same_p = !regime || regime() == base_regime;
      v = saved - options.h;
      const double fm = objective();
      const bool same_m = !regime || regime() == base_regime;
      v = saved;
      const std::string where = p.name + "[" + std::to_string(k) + "]";
      const double analytic = g.values[k];
      if (!std::isfinite(analytic)) {
        fail("non-finite analytic gradient at " + where);
        continue;
      }
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        fail("non-finite objective around " + where);
        continue;
      }
      if (!same_p || !same_m) {
        ++rep.rejected;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * options.h);
      const double err = relative_error(analytic, numeric);
      ++rep.probes;
      if (err > rep.max_rel_err || rep.probes == 1) {
        rep.max_rel_err = err;
        rep.worst_param = p.name;
        rep.worst_index = k;
        rep.worst_analytic = analytic;
        rep.worst_numeric = numeric;
      }
    }
  }
  if (regime && regime() != base_regime) fail("objective regime changed after probing; parameters were not restored");
  return rep;
}

namespace {

struct Instance {
  ImageD image;
  ImageD target;
  ImageD coeff;
  GridGeometry geom;
};

void fill_uniform(ImageD& img, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  for (double& v : img.values()) v = d(rng);
}

// Linear functional plus MSE, so every output entry carries a distinct,
// non-trivial weight.
double loss_value(const ImageD& out, const Instance& inst) {
  auto o = out.values();
  auto t = inst.target.values();
  auto c = inst.coeff.values();
  double lin = 0.0, sq = 0.0;
  for (size_t i = 0; i < o.size(); ++i) {
    lin += c[i] * o[i];
    sq += (o[i] - t[i]) * (o[i] - t[i]);
  }
  return lin + sq / static_cast<double>(o.size());
}

ImageD loss_grad(const ImageD& out, const Instance& inst) {
  ImageD g(out.height(), out.width(), out.channels());
  auto o = out.values();
  auto t = inst.target.values();
  auto c = inst.coeff.values();
  auto gv = g.values();
  for (size_t i = 0; i < o.size(); ++i) gv[i] = c[i] + 2.0 * (o[i] - t[i]) / static_cast<double>(o.size());
  return g;
}

class Fingerprint {
 public:
  void add(std::uint64_t v) {
    h_ ^= v + 0x9e3779b97f4a7c15ULL + (h_ << 6) + (h_ >> 2);
  }
  void signs(const ImageD& img) {
    for (double v : img.values()) add(v > 0.0 ? 1 : 0);
  }
  void cells(const ImageD& guide, int depth) {
    for (double v : guide.values()) add(static_cast<std::uint64_t>(std::floor(v * (depth - 1))));
  }
  void hidden_signs(const GuidanceNetD& net, const ImageD& input) {
    if (net.out_channels == 0 || input.empty()) return;
    for (int y = 0; y < input.height(); ++y)
      for (int x = 0; x < input.width(); ++x) {
        const double* px = input.pixel(y, x);
        for (int h = 0; h < net.hidden; ++h) {
          double a = net.b1[static_cast<size_t>(h)];
          for (int c = 0; c < net.in_channels; ++c)
            a += net.w1[static_cast<size_t>(h) * net.in_channels + c] * px[c];
          add(a > 0.0 ? 1 : 0);
        }
      }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::uint64_t model_regime(const ModelD& m, const ForwardCache<double>& c) {
  Fingerprint f;
  const int D = m.grids.front().depth();
  f.cells(c.guide1, D);
  f.hidden_signs(m.gnet1, c.input);
  if (!c.pre1.empty()) {
    f.signs(c.pre1);
    f.cells(c.guide2, D);
    f.hidden_signs(m.gnet2, c.hidden);
  }
  return f.value();
}

std::string group_of(const std::string& name) { return name.substr(0, name.find('.')); }

// Splits parallel parameter/gradient lists by group name, keeping order.
std::vector<std::pair<std::string, std::pair<ParamList<double>, ParamList<double>>>> by_group(
    const ParamList<double>& params, const ParamList<double>& grads) {
  std::vector<std::pair<std::string, std::pair<ParamList<double>, ParamList<double>>>> out;
  for (size_t i = 0; i < params.size(); ++i) {
    const std::string g = group_of(params[i].name);
    if (out.empty() || out.back().first != g) out.push_back({g, {}});
    out.back().second.first.push_back(params[i]);
    out.back().second.second.push_back(grads[i]);
  }
  return out;
}

}  // namespace

std::vector<GroupResult> gradcheck_pipeline(const PipelineGradcheckConfig& config) {
  const int n = config.image_size, gs = config.grid_size;
  if (n <= 0 || gs <= 0 || n % gs != 0)
    throw ConfigError("gradcheck: image size " + std::to_string(n) + " must be a positive multiple of grid size " +
                      std::to_string(gs));
  PipelineConfig pcfg = config.pipeline;
  pcfg.clamp_output = false;

  std::mt19937_64 rng(config.seed);
  Instance inst;
  inst.image = ImageD(n, n, kColorChannels);
  inst.target = ImageD(n, n, kColorChannels);
  inst.coeff = ImageD(n, n, kColorChannels);
  fill_uniform(inst.image, rng, 0.05, 0.95);
  fill_uniform(inst.target, rng, 0.0, 1.0);
  fill_uniform(inst.coeff, rng, -1.0, 1.0);
  inst.geom = GridGeometry{gs, gs, pcfg.depth, n, n, pcfg.align_centers, 255.0};
  inst.geom.validate();

  std::vector<GroupResult> results;

  // Direct grids: grid and guidance-net groups.
  ModelD model = ModelD::random(pcfg, inst.geom, config.seed + 1, 0.3, 1.0);
  ModelD grads = pipeline_backward(model, pipeline_forward(model, inst.image),
                                   loss_grad(pipeline_forward(model, inst.image).output, inst));
  if (config.corrupt_backward)
    for (double& v : grads.grids.front().values()) v *= 1.05;
  ForwardCache<double> probe_cache;
  auto objective = [&] {
    probe_cache = pipeline_forward(model, inst.image);
    return loss_value(probe_cache.output, inst);
  };
  auto regime = [&] {
    // Relies on objective() having just run at the same point; recompute to
    // keep the two independent.
    return model_regime(model, pipeline_forward(model, inst.image));
  };
  GradcheckOptions opts = config.options;
  for (auto& [name, lists] : by_group(model.parameters(), grads.parameters())) {
    results.push_back({name, gradcheck(objective, lists.first, lists.second, opts, regime)});
    opts.seed += 1;
  }

  // Produced grids: producer group.
  ProducerConfig prod;
  prod.in_channels = kColorChannels;
  prod.convs = {{4, 1}};
  prod.unshuffle = n / gs;
  prod.depth = pcfg.depth;
  prod.heads = grid_kinds(pcfg);
  ProducerNetD producer = ProducerNetD::create(prod, config.seed + 2);
  {
    std::mt19937_64 prng(config.seed + 3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& p : producer.parameters()) {
      const bool head = p.name.find(".head") != std::string::npos;
      const bool bias = p.name.ends_with(".bias");
      for (double& v : p.values) {
        if (head && !bias) v = 0.05 * normal(prng);
        else if (bias) v += 0.1 * normal(prng);
      }
    }
  }
  ModelD pmodel = ModelD::random(pcfg, inst.geom, config.seed + 4, 0.0, 1.0);
  auto run_producer = [&] {
    pmodel.grids = produce_grids(producer, inst.image, inst.geom);
    return pipeline_forward(pmodel, inst.image);
  };
  const ForwardCache<double> pc = run_producer();
  const ModelD pgrads = pipeline_backward(pmodel, pc, loss_grad(pc.output, inst));
  ProducerNetD prod_grads = producer_backward(producer, inst.image, inst.geom, pgrads.grids);
  auto pobjective = [&] { return loss_value(run_producer().output, inst); };
  auto pregime = [&] {
    const ForwardCache<double> c = run_producer();
    Fingerprint f;
    f.add(model_regime(pmodel, c));
    const auto acts = conv_stack(producer, inst.image);
    for (size_t i = 1; i < acts.size(); ++i) f.signs(acts[i]);
    return f.value();
  };
  results.push_back({"producer", gradcheck(pobjective, producer.parameters(), prod_grads.parameters(), opts, pregime)});
  return results;
}

}  // namespace bpam
