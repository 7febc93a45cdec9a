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
#include <filesystem>
#include <optional>

#include "bpam/containers.hpp"
#include "bpam/pipeline.hpp"
#include "bpam/producer.hpp"

namespace bpam {

// Writes the grids as BPG1 and the guidance nets (plus the producer, when
// given) as BPT1. Both files are replaced atomically.
void save_model(Model& model, const std::filesystem::path& grids_path, const std::filesystem::path& weights_path,
                ProducerNet* producer = nullptr);

// Guidance net stored under `prefix` ("gnet1" / "gnet2"), sized from the
// stored shapes.
GuidanceNet load_guidance(const std::vector<TensorEntry>& entries, const std::string& prefix);

// Reassembles a model from a grid file and an optional weights file. The
// transform mode follows the grid parameter counts; without weights the
// guidance nets are freshly initialized from `seed` and `cfg.decomposed`
// picks their width. With weights, the stored nets decide decomposition and
// must agree with `cfg.decomposed`.
Model load_model(const std::filesystem::path& grids_path, const std::optional<std::filesystem::path>& weights_path,
                 PipelineConfig cfg, std::uint64_t seed = 0);

}  // namespace bpam
