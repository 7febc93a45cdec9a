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

#include <cstring>
#include <fstream>

#include "bpam/atomic_file.hpp"
#include "bpam/containers.hpp"
#include "bpam/errors.hpp"
#include "bpam/image_io.hpp"
#include "bpam/model_io.hpp"
#include "bpam/pipeline.hpp"
#include "bpam/producer.hpp"
#include "doctest.h"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace bpam;
namespace fs = std::filesystem;

namespace {

std::vector<BilateralGrid> sample_grids() {
  GridGeometry g;
  g.grid_h = 3;
  g.grid_w = 2;
  g.depth = 4;
  g.image_h = 24;
  g.image_w = 16;
  g.align_centers = false;
  auto a = testutil::random_grid<float>(g, 32, 1);
  a.values()[0] = -0.0f;
  a.values()[1] = 1e-40f;  // subnormal
  return {a, testutil::random_grid<float>(g, 27, 2)};
}

bool same_bits(const std::vector<BilateralGrid>& a, const std::vector<BilateralGrid>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].geometry() == b[i].geometry()) || a[i].params() != b[i].params()) return false;
    if (std::memcmp(a[i].values().data(), b[i].values().data(), a[i].size() * sizeof(float)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("grid container round trip is bit exact") {
  const auto grids = sample_grids();
  const std::string bytes = encode_grids(grids);
  CHECK(bytes.substr(0, 4) == "BPG1");
  CHECK(bytes.size() == 12 + 2 * 28 + 4 * (3 * 2 * 4 * (32 + 27)));
  CHECK(same_bits(decode_grids(bytes), grids));
  CHECK(encode_grids(decode_grids(bytes)) == bytes);

  testutil::TempDir dir;
  save_grids(grids, dir / "g.bpg");
  CHECK(same_bits(load_grids(dir / "g.bpg"), grids));
  CHECK(read_file(dir / "g.bpg") == bytes);
}

TEST_CASE("grid container rejects malformed input") {
  const std::string bytes = encode_grids(sample_grids());
  CHECK_THROWS_AS(decode_grids(bytes.substr(0, bytes.size() - 1)), DecodeError);
  CHECK_THROWS_AS(decode_grids(bytes + "x"), DecodeError);
  CHECK_THROWS_AS(decode_grids("BPT1" + bytes.substr(4)), DecodeError);
  CHECK_THROWS_AS(decode_grids(""), DecodeError);
  std::string v2 = bytes;
  v2[4] = 2;
  CHECK_THROWS_AS(decode_grids(v2), FormatError);
  CHECK_THROWS_AS(load_grids("/nonexistent/g.bpg"), IoError);
}

TEST_CASE("tensor container round trip is bit exact") {
  std::vector<TensorEntry> entries = {
      {"gnet1.w1", {16, 3}, {}}, {"scalar", {}, {3.5f}}, {"empty", {0}, {}}, {"ünïcode", {2}, {-0.0f, 1e-42f}}};
  entries[0].data.resize(48);
  for (size_t i = 0; i < 48; ++i) entries[0].data[i] = float(i) * 0.1f - 2.0f;
  const std::string bytes = encode_tensors(entries);
  CHECK(bytes.substr(0, 4) == "BPT1");
  const auto back = decode_tensors(bytes);
  REQUIRE(back.size() == entries.size());
  CHECK(encode_tensors(back) == bytes);
  CHECK(std::signbit(back[3].data[0]));
  CHECK(find_tensor(back, "scalar")->data[0] == 3.5f);
  CHECK(find_tensor(back, "missing") == nullptr);
  CHECK_THROWS_AS(decode_tensors(bytes.substr(0, bytes.size() - 2)), DecodeError);
  CHECK_THROWS_AS(encode_tensors({{"bad", {2, 2}, {1.0f}}}), ArgumentError);
}

TEST_CASE("png round trip at 8 and 16 bits") {
  testutil::TempDir dir;
  Image img(5, 7, 3);
  unsigned code = 0;
  for (float& v : img.values()) v = float(code++ % 256) / 255.0f;
  save_image(img, dir / "a.png", 8);
  const Image back = load_image(dir / "a.png");
  CHECK(back == img);
  save_image(back, dir / "b.png", 8);
  CHECK(read_file(dir / "a.png") == read_file(dir / "b.png"));

  const auto r = testutil::random_image(4, 6, 1, 3);
  save_image(r, dir / "c.png", 16);
  const Image r16 = load_image(dir / "c.png");
  CHECK(r16.channels() == 1);
  CHECK(testutil::max_abs_diff(r16, r) <= 0.5 / 65535 + 1e-7);

  CHECK(quantize(0.5f / 255.0f, 8) == 1u);
  CHECK(quantize(-1.0f, 8) == 0u);
  CHECK(quantize(2.0f, 16) == 65535u);
  CHECK_THROWS_AS(save_image(Image(2, 2, 2), dir / "x.png"), ArgumentError);
  CHECK_THROWS_AS(save_image(img, dir / "x.png", 12), ArgumentError);
  std::ofstream(dir / "junk.png") << "definitely not a png";
  CHECK_THROWS_AS(load_image(dir / "junk.png"), DecodeError);
  CHECK_THROWS_AS(load_image(dir / "none.png"), IoError);
  const std::string good = read_file(dir / "a.png");
  std::ofstream(dir / "cut.png", std::ios::binary) << good.substr(0, good.size() / 2);
  CHECK_THROWS_AS(load_image(dir / "cut.png"), DecodeError);
}

TEST_CASE("atomic writes leave no temporary behind") {
  testutil::TempDir dir;
  write_file_atomic(dir / "f.txt", "hello");
  CHECK(read_file(dir / "f.txt") == "hello");
  {
    AtomicFile f(dir / "g.txt");
    std::ofstream(f.temp_path()) << "partial";
    CHECK(fs::exists(f.temp_path()));
  }
  CHECK(!fs::exists(dir / "g.txt"));
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++files;
  CHECK(files == 1);
}

TEST_CASE("model files round trip and keep enhance output") {
  testutil::TempDir dir;
  PipelineConfig cfg;
  cfg.grid_ratio = 4;
  const auto geom = geometry_for_ratio(20, 28, 4, 8);
  for (bool dec : {true, false}) {
    for (TransformMode mode : {TransformMode::kMlp, TransformMode::kAffine}) {
      cfg.decomposed = dec;
      cfg.mode = mode;
      auto m = Model::random(cfg, geom, 4);
      save_model(m, dir / "g.bpg", dir / "w.bpt");
      const Model back = load_model(dir / "g.bpg", dir / "w.bpt", cfg);
      CHECK(back == m);
      const auto img = testutil::random_image(20, 28, 3, 5);
      CHECK(enhance(img, back) == enhance(img, m));
      auto other = cfg;
      other.decomposed = !dec;
      CHECK_THROWS_AS(load_model(dir / "g.bpg", dir / "w.bpt", other), ConfigError);
    }
  }
  cfg.decomposed = true;
  cfg.mode = TransformMode::kMlp;
  auto m = Model::identity(cfg, geom, 1);
  auto prod = ProducerNet::create(producer_plan_for_ratio(4).config, 2);
  save_model(m, dir / "g.bpg", dir / "w.bpt", &prod);
  const auto entries = load_tensors(dir / "w.bpt");
  CHECK(has_producer(entries));
  CHECK(load_producer(entries) == prod);
  const Model no_weights = load_model(dir / "g.bpg", std::nullopt, cfg, 1);
  CHECK(no_weights.grids == m.grids);
  CHECK_THROWS_AS(load_guidance(entries, "gnet3"), FormatError);
}
