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

// Exercises the shared library through its C header only.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "longipet/longipet.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path path;
  Scratch() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("longipet_capi_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

lp_volume* make(int nx, int ny, int nz, double fill) {
  std::vector<double> d(static_cast<std::size_t>(nx) * ny * nz, fill);
  lp_volume* v = nullptr;
  REQUIRE(lp_volume_create(nx, ny, nz, d.data(), &v) == LP_OK);
  return v;
}

std::vector<double> data_of(const lp_volume* v) {
  int nx, ny, nz;
  REQUIRE(lp_volume_dims(v, &nx, &ny, &nz) == LP_OK);
  std::vector<double> d(static_cast<std::size_t>(nx) * ny * nz);
  REQUIRE(lp_volume_copy_data(v, d.data(), d.size()) == LP_OK);
  return d;
}

lp_status run(const char* cmd, const nlohmann::json& opts, nlohmann::json* manifest = nullptr) {
  char* out = nullptr;
  lp_status s = lp_run(cmd, opts.dump().c_str(), &out);
  if (out) {
    if (manifest) *manifest = nlohmann::json::parse(out);
    lp_string_free(out);
  }
  return s;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::strlen(lp_version()) > 0);
  CHECK(std::string(lp_status_name(LP_OK)) == "ok");
  CHECK(std::string(lp_status_name(LP_ERR_LEAKAGE)) == "leakage");
}

TEST_CASE("volumes, linear prediction and padding") {
  lp_volume* a = make(3, 4, 5, 1.2);
  lp_volume* b = make(3, 4, 5, 1.0);
  lp_volume* c = nullptr;
  REQUIRE(lp_predict_linear(a, b, 0, &c) == LP_OK);
  for (double v : data_of(c)) CHECK(v == doctest::Approx(0.8));
  lp_volume* p = nullptr;
  REQUIRE(lp_volume_pad_to_even(c, &p) == LP_OK);
  int nx, ny, nz;
  lp_volume_dims(p, &nx, &ny, &nz);
  CHECK(nx == 4);
  CHECK(ny == 4);
  CHECK(nz == 6);
  double mae = -1;
  REQUIRE(lp_mae(a, b, nullptr, &mae) == LP_OK);
  CHECK(mae == doctest::Approx(0.2));

  Scratch dir;
  const std::string path = (dir.path / "c.nii").string();
  REQUIRE(lp_volume_write(c, path.c_str()) == LP_OK);
  lp_volume* back = nullptr;
  REQUIRE(lp_volume_read(path.c_str(), &back) == LP_OK);
  CHECK(data_of(back)[0] == static_cast<double>(0.8f));
  char hex[65];
  REQUIRE(lp_hash_file(path.c_str(), hex) == LP_OK);
  CHECK(std::strlen(hex) == 64);
  for (lp_volume* v : {a, b, c, p, back}) lp_volume_free(v);
}

TEST_CASE("errors carry status codes and messages") {
  lp_volume* v = nullptr;
  CHECK(lp_volume_read("/nonexistent/longipet.vol", &v) == LP_ERR_IO);
  CHECK(v == nullptr);
  CHECK(std::strlen(lp_last_error()) > 0);
  CHECK(lp_volume_create(0, 1, 1, nullptr, &v) != LP_OK);
  lp_volume* a = make(2, 2, 2, 1.0);
  lp_volume* b = make(2, 2, 4, 1.0);
  lp_volume* c = nullptr;
  CHECK(lp_predict_linear(a, b, 0, &c) == LP_ERR_SHAPE);
  lp_volume_free(a);
  lp_volume_free(b);
  CHECK(run("frobnicate", nlohmann::json::object()) == LP_ERR_USAGE);
  CHECK(run("stats", {{"input", "x.csv"}, {"bogus_key", 1}}) == LP_ERR_USAGE);
  CHECK(lp_run("stats", "{not json", nullptr) == LP_ERR_USAGE);
}

TEST_CASE("model lifecycle") {
  lp_model* m = nullptr;
  REQUIRE(lp_model_init(8, 8, 8, 2, 3, 1, &m) == LP_OK);
  lp_volume* y0 = make(8, 8, 8, 1.0);
  lp_volume* y1 = make(8, 8, 8, 1.1);
  lp_volume* out = nullptr;
  // No training pass yet: no batch-norm statistics.
  CHECK(lp_model_predict(m, y0, y1, &out) == LP_ERR_STATE);
  lp_model_free(m);
  lp_model* bad = nullptr;
  CHECK(lp_model_init(7, 8, 8, 2, 3, 1, &bad) == LP_ERR_PARAMETER);

  Scratch dir;
  REQUIRE(run("phantom", {{"out", (dir.path / "data").string()}, {"dims", 8}, {"cn", 2}, {"mci", 2}, {"dem", 1},
                          {"years", 3}}) == LP_OK);
  nlohmann::json manifest;
  REQUIRE(run("train", {{"manifest", (dir.path / "data" / "manifest.json").string()},
                        {"out", (dir.path / "models").string()}, {"epochs", 1}, {"batch", 4}, {"copies", 0},
                        {"lstm_filters", 2}, {"decoder_filters", 2}, {"seed", 3}},
              &manifest) == LP_OK);
  CHECK(manifest["command"] == "train");
  lp_model* trained = nullptr;
  REQUIRE(lp_model_load((dir.path / "models" / "model_0.bin").string().c_str(), &trained) == LP_OK);
  int nx, ny, nz;
  lp_model_dims(trained, &nx, &ny, &nz);
  CHECK(nx == 8);
  REQUIRE(lp_model_predict(trained, y0, y1, &out) == LP_OK);
  for (double v : data_of(out)) CHECK(v >= 0.0);
  int lstm[4], pooled[4], outs[4];
  REQUIRE(lp_model_trace(trained, y0, y1, lstm, pooled, outs) == LP_OK);
  CHECK(lstm[3] == 2);
  CHECK(pooled[0] == 4);
  CHECK(outs[0] == 8);
  CHECK(outs[3] == 1);
  const std::string saved = (dir.path / "copy.bin").string();
  REQUIRE(lp_model_save(trained, saved.c_str()) == LP_OK);
  lp_model* again = nullptr;
  REQUIRE(lp_model_load(saved.c_str(), &again) == LP_OK);
  lp_volume* out2 = nullptr;
  REQUIRE(lp_model_predict(again, y0, y1, &out2) == LP_OK);
  CHECK(data_of(out2) == data_of(out));
  CHECK(lp_model_load((dir.path / "data" / "roi.json").string().c_str(), &bad) == LP_ERR_FORMAT);
  for (lp_volume* v : {y0, y1, out, out2}) lp_volume_free(v);
  lp_model_free(trained);
  lp_model_free(again);
}
