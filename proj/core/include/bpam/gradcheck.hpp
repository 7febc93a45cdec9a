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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bpam/params.hpp"
#include "bpam/pipeline.hpp"

namespace bpam {

struct GradcheckOptions {
  double h = 1e-4;
  double tolerance = 1e-4;
  // Tensors with more entries are subsampled to this many distinct probes.
  int probes_per_tensor = 128;
  std::uint64_t seed = 0;
};

struct GradcheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t probes = 0;
  std::size_t rejected = 0;  // probes whose stencil crossed a kink
  bool finite = true;
  std::string failure;       // first non-finite location, if any

  bool passed(double tolerance) const { return finite && max_rel_err < tolerance; }
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Central differences of `objective` against `grads` for every tensor in
// `params`. When `regime` is given, a probe is dropped if the regime
// fingerprint at either stencil point differs from the unperturbed one (the
// objective is not smooth over the stencil).
GradcheckReport gradcheck(const std::function<double()>& objective, const ParamList<double>& params,
                          const ParamList<double>& grads, const GradcheckOptions& options,
                          const std::function<std::uint64_t()>& regime = {});

struct GroupResult {
  std::string group;
  GradcheckReport report;
};

struct PipelineGradcheckConfig {
  PipelineConfig pipeline{TransformMode::kMlp, true, 4, 4, true, GuidanceNet::kDefaultHidden, false};
  int image_size = 8;
  int grid_size = 2;
  std::uint64_t seed = 0;
  GradcheckOptions options;
  // Negative control: perturbs the analytic grid-1 gradient.
  bool corrupt_backward = false;
};

// Gradient check of the full pipeline on a seeded random instance, one result
// per parameter group: grid1, grid2, gnet1, gnet2 (direct grids) and producer
// (grids produced from the image by a small producer). The loss is a random
// linear functional plus MSE against a random target, evaluated in double.
std::vector<GroupResult> gradcheck_pipeline(const PipelineGradcheckConfig& config);

}  // namespace bpam
