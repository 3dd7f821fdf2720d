/* Copyright 2026 The LongiPET Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "gradcheck.hpp"
#include "longipet/error.hpp"
#include "longipet/i2i_model.hpp"
#include "longipet/param_io.hpp"
#include "test_util.hpp"

using namespace longipet;
using ad::Shape;
using ad::Tensor;
using longipet::testing::random_volume;
using longipet::testing::ScratchDir;

namespace {

I2IModelConfig reduced(Dims3 d = {8, 8, 8}, int lstm = 2, int dec = 3) {
  I2IModelConfig c;
  c.dims = d;
  c.lstm_filters = lstm;
  c.decoder_filters = dec;
  return c;
}

// Warm-up train-mode pass so inference has running statistics.
I2IModel warmed(const I2IModelConfig& c, std::uint64_t seed) {
  I2IModel m{c, init_model(c, seed)};
  Volume3D a = random_volume(c.dims, seed + 1), b = random_volume(c.dims, seed + 2);
  forward_batch(m.params, c, volumes_to_tensor({&a}), volumes_to_tensor({&b}), ad::Mode::kTrain);
  return m;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a longipet::Error");
  return ErrorKind::kContract;
}

}  // namespace

TEST_CASE("init is seeded and within the Glorot limits") {
  I2IModelConfig c = reduced();
  auto a = init_model(c, 1), b = init_model(c, 1), other = init_model(c, 2);
  CHECK(a.equals(b));
  CHECK(!a.equals(other));
  for (const auto& [name, t] : a.learnable) {
    if (t.shape().size() != 5) continue;
    const double limit = glorot_limit(t.shape());
    for (double v : t.values()) {
      CHECK(std::abs(v) <= limit);
      CHECK(v == static_cast<double>(static_cast<float>(v)));
    }
  }
  CHECK(a.at(kLstmKernel).shape() == Shape{3, 3, 3, 3, 8});
  CHECK(a.at(kDeconvKernel).shape() == Shape{3, 3, 3, 3, 2});
  CHECK(a.at(kOutputKernel).shape() == Shape{1, 1, 1, 3, 1});
  // Glorot limit by hand for the LSTM kernel: fans 27*3 and 27*8.
  CHECK(glorot_limit({3, 3, 3, 3, 8}) == doctest::Approx(std::sqrt(6.0 / (81.0 + 216.0))));
}

TEST_CASE("config validation") {
  I2IModelConfig c = reduced({7, 8, 8});
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::kParameter);
  c = reduced();
  c.lstm_filters = 0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::kParameter);
  c = reduced();
  CHECK(I2IModelConfig::from_json(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("forward shapes, nonnegativity and purity") {
  Rng rng(3);
  for (Dims3 d : {Dims3{8, 8, 8}, Dims3{10, 6, 4}, Dims3{4, 12, 8}}) {
    I2IModelConfig c = reduced(d, 3, 4);
    I2IModel m = warmed(c, 10);
    Volume3D y0 = random_volume(d, 20, -1, 3), y1 = random_volume(d, 21, -1, 3);
    ForwardTrace tr;
    Volume3D out = predict(m, y0, y1, &tr);
    CHECK(out.dims() == d);
    CHECK(out.min() >= 0.0);
    CHECK(tr.lstm_hidden == Shape{1, d.nz, d.ny, d.nx, 3});
    CHECK(tr.pooled == Shape{1, d.nz / 2, d.ny / 2, d.nx / 2, 3});
    CHECK(tr.decoded == Shape{1, d.nz / 2, d.ny / 2, d.nx / 2, 4});
    CHECK(tr.output == Shape{1, d.nz, d.ny, d.nx, 1});
    CHECK(predict(m, y0, y1).values() == out.values());
  }
}

TEST_CASE("inference before any training pass is a state error") {
  I2IModelConfig c = reduced();
  I2IModel m{c, init_model(c, 1)};
  Volume3D v = random_volume(c.dims, 1);
  CHECK(kind_of([&] { predict(m, v, v); }) == ErrorKind::kState);
}

TEST_CASE("wrong input dims are a shape error") {
  I2IModel m = warmed(reduced(), 4);
  Volume3D v = random_volume({8, 8, 6}, 1);
  CHECK(kind_of([&] { predict(m, v, v); }) == ErrorKind::kShape);
}

TEST_CASE("end-to-end gradient check on the reduced network") {
  I2IModelConfig c = reduced();
  ad::ParameterSet p = init_model(c, 7);
  Rng rng(8);
  Tensor y0 = longipet::testing::random_tensor({2, 8, 8, 8, 1}, rng, 0.5, 1.5, false);
  Tensor y1 = longipet::testing::random_tensor({2, 8, 8, 8, 1}, rng, 0.5, 1.5, false);
  Tensor w = longipet::testing::random_tensor({2, 8, 8, 8, 1}, rng, -1, 1, false);
  // Positive output bias keeps the final relu active everywhere.
  p.at(kOutputBias).mutable_values()[0] = 2.0;
  std::vector<std::string> names;
  std::vector<Tensor> leaves;
  for (auto& [name, t] : p.learnable) {
    names.push_back(name);
    leaves.push_back(t);
  }
  auto objective = [&](const std::vector<Tensor>& in) {
    ad::ParameterSet q;
    for (std::size_t i = 0; i < in.size(); ++i) q.learnable.emplace(names[i], in[i]);
    q.running = p.running;
    return longipet::testing::project(forward_batch(q, c, y0, y1, ad::Mode::kTrain), w);
  };
  auto r = longipet::testing::grad_check(objective, leaves);
  CHECK(r.max_rel_error < 1e-3);
}

TEST_CASE("save and load") {
  ScratchDir dir("model");
  I2IModel m = warmed(reduced(), 5);
  m.params.round_to_float32();
  save_model(m, dir / "m.bin", {{"note", "x"}});
  I2IModel back = load_model(dir / "m.bin");
  CHECK(back.params.equals(m.params));
  CHECK(back.config.to_json() == m.config.to_json());
  Volume3D a = random_volume(m.config.dims, 1), b = random_volume(m.config.dims, 2);
  CHECK(predict(back, a, b).values() == predict(m, a, b).values());

  SUBCASE("truncated blob") {
    std::filesystem::resize_file(dir / "m.bin", std::filesystem::file_size(dir / "m.bin") - 4);
    CHECK(kind_of([&] { load_model(dir / "m.bin"); }) == ErrorKind::kFormat);
  }
  SUBCASE("unknown version") {
    std::vector<char> bytes = ad::encode_parameters(m.params, {{"kind", "i2i"}, {"config", m.config.to_json()}});
    std::string text(bytes.begin(), bytes.end());
    auto pos = text.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    text[pos + 10] = '9';
    std::ofstream(dir / "v.bin", std::ios::binary) << text;
    CHECK(kind_of([&] { load_model(dir / "v.bin"); }) == ErrorKind::kFormat);
  }
  SUBCASE("bad magic") {
    std::ofstream(dir / "junk.bin", std::ios::binary) << "not a model at all";
    CHECK(kind_of([&] { load_model(dir / "junk.bin"); }) == ErrorKind::kFormat);
  }
}
