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

#include "bpam/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bpam/errors.hpp"

namespace bpam {

AdamState::AdamState(AdamConfig config) : config_(config) {
  if (!(config.beta1 >= 0 && config.beta1 < 1) || !(config.beta2 >= 0 && config.beta2 < 1) || !(config.eps > 0))
    throw ConfigError("adam: betas must lie in [0, 1) and eps must be positive");
}

const AdamState::Moments* AdamState::moments(const std::string& name) const {
  auto it = state_.find(name);
  return it == state_.end() ? nullptr : &it->second;
}

template <class T>
void AdamState::step(const ParamList<T>& params, const ParamList<T>& grads, double lr) {
  if (params.size() != grads.size())
    throw ArgumentError("adam: " + std::to_string(params.size()) + " parameters but " +
                        std::to_string(grads.size()) + " gradients");
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const auto& g = grads[i];
    if (p.name != g.name || p.values.size() != g.values.size())
      throw ArgumentError("adam: gradient '" + g.name + "' does not match parameter '" + p.name + "'");
    for (size_t k = 0; k < g.values.size(); ++k)
      if (!std::isfinite(static_cast<double>(g.values[k])))
        throw TrainingError("adam: non-finite gradient in '" + p.name + "' at index " + std::to_string(k), step_);
  }
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const auto& g = grads[i];
    auto& st = state_[p.name];
    if (st.m.size() != p.values.size()) {
      st.m.assign(p.values.size(), 0.0);
      st.v.assign(p.values.size(), 0.0);
    }
    for (size_t k = 0; k < p.values.size(); ++k) {
      const double gk = g.values[k];
      st.m[k] = b1 * st.m[k] + (1.0 - b1) * gk;
      st.v[k] = b2 * st.v[k] + (1.0 - b2) * gk * gk;
      const double mh = st.m[k] / c1;
      const double vh = st.v[k] / c2;
      p.values[k] = static_cast<T>(static_cast<double>(p.values[k]) - lr * mh / (std::sqrt(vh) + config_.eps));
    }
  }
}

template void AdamState::step(const ParamList<float>&, const ParamList<float>&, double);
template void AdamState::step(const ParamList<double>&, const ParamList<double>&, double);

void Schedule::validate() const {
  if (!(lr_min > 0) || !(lr_max >= lr_min))
    throw ConfigError("schedule: need lr_max >= lr_min > 0, got lr_max=" + std::to_string(lr_max) +
                      " lr_min=" + std::to_string(lr_min));
  if (total_steps <= 0) throw ConfigError("schedule: total_steps must be positive");
}

double cosine_lr(const Schedule& s, long t) {
  s.validate();
  if (t <= 0) return s.lr_max;
  if (t >= s.total_steps) return s.lr_min;
  const double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(s.total_steps);
  return s.lr_min + (s.lr_max - s.lr_min) * 0.5 * (1.0 + std::cos(phase));
}

}  // namespace bpam
