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

#include <map>
#include <string>
#include <vector>

#include "bpam/params.hpp"

namespace bpam {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments are kept in double and keyed by parameter name, so parameter lists
// may be rebuilt between steps as long as names and sizes stay stable.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {});

  const AdamConfig& config() const { return config_; }
  long step_count() const { return step_; }

  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  const Moments* moments(const std::string& name) const;

  // One bias-corrected Adam update. Every gradient is checked before any
  // parameter moves; a non-finite entry raises TrainingError naming it.
  template <class T>
  void step(const ParamList<T>& params, const ParamList<T>& grads, double lr);

 private:
  AdamConfig config_;
  long step_ = 0;
  std::map<std::string, Moments> state_;
};

template <class T>
void adam_step(AdamState& state, const ParamList<T>& params, const ParamList<T>& grads, double lr) {
  state.step(params, grads, lr);
}

struct Schedule {
  double lr_max = 3e-4;
  double lr_min = 4e-6;
  long total_steps = 2000;

  void validate() const;
};

// Cosine annealing from lr_max at t = 0 to lr_min at t = T; t > T yields
// lr_min.
double cosine_lr(const Schedule& s, long t);

}  // namespace bpam
