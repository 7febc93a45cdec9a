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
#include <span>
#include <string>
#include <vector>

namespace bpam {

// Named view of one trainable tensor. Models expose their parameters as a
// list of these; optimizers, gradient checks and the tensor container all
// walk the same list.
template <class T>
struct ParamView {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::span<T> values;
};

template <class T>
using ParamList = std::vector<ParamView<T>>;

}  // namespace bpam
