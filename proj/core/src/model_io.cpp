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

#include "bpam/model_io.hpp"

#include <string>

#include "bpam/errors.hpp"

namespace bpam {

void save_model(Model& model, const std::filesystem::path& grids_path, const std::filesystem::path& weights_path,
                ProducerNet* producer) {
  model.validate();
  std::vector<TensorEntry> entries;
  append_entries(entries, model.guidance_parameters());
  if (producer) append_producer(entries, *producer);
  save_grids(model.grids, grids_path);
  save_tensors(entries, weights_path);
}

GuidanceNet load_guidance(const std::vector<TensorEntry>& entries, const std::string& prefix) {
  const TensorEntry* w1 = find_tensor(entries, prefix + ".w1");
  const TensorEntry* w2 = find_tensor(entries, prefix + ".w2");
  if (!w1 || !w2) throw FormatError("weights file has no guidance net '" + prefix + "'");
  if (w1->shape.size() != 2 || w2->shape.size() != 2 || w1->shape[0] != w2->shape[1])
    throw FormatError("guidance net '" + prefix + "' has inconsistent shapes");
  GuidanceNet net = GuidanceNet::zeros(static_cast<int>(w1->shape[1]), static_cast<int>(w2->shape[0]),
                                       static_cast<int>(w1->shape[0]));
  assign_entries(net.parameters(prefix), entries);
  return net;
}

Model load_model(const std::filesystem::path& grids_path, const std::optional<std::filesystem::path>& weights_path,
                 PipelineConfig cfg, std::uint64_t seed) {
  std::vector<BilateralGrid> grids = load_grids(grids_path);
  if (grids.size() == 1 && grids[0].params() == kAffineParams) {
    cfg.mode = TransformMode::kAffine;
  } else if (grids.size() == 2 && grids[0].params() == kStage1Params && grids[1].params() == kStage2Params) {
    cfg.mode = TransformMode::kMlp;
  } else {
    std::string counts;
    for (const auto& g : grids) counts += (counts.empty() ? "" : ",") + std::to_string(g.params());
    throw FormatError(grids_path.string() + ": expected one 12-parameter grid or 32- and 27-parameter grids, got [" +
                      counts + "]");
  }
  const GridGeometry& geom = grids[0].geometry();
  cfg.depth = geom.depth;
  cfg.align_centers = geom.align_centers;

  Model m;
  if (weights_path) {
    const auto entries = load_tensors(*weights_path);
    m.gnet1 = load_guidance(entries, "gnet1");
    if (cfg.mode == TransformMode::kMlp) m.gnet2 = load_guidance(entries, "gnet2");
    cfg.guidance_hidden = m.gnet1.hidden;
    const bool stored_decomposed = m.gnet1.out_channels > 1;
    if (stored_decomposed != cfg.decomposed)
      throw ConfigError(weights_path->string() + ": guidance nets are " +
                        (stored_decomposed ? "decomposed" : "monolithic") + " but the configuration asks for " +
                        (cfg.decomposed ? "decomposed" : "monolithic") + " slicing");
    m.config = cfg;
    m.grids = std::move(grids);
  } else {
    m = Model::identity(cfg, geom, seed);
    m.grids = std::move(grids);
  }
  m.validate();
  return m;
}

}  // namespace bpam
