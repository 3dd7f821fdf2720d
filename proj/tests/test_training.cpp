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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "doctest.h"
#include "longipet/error.hpp"
#include "longipet/phantom.hpp"
#include "longipet/training.hpp"
#include "test_util.hpp"

using namespace longipet;
using longipet::testing::ScratchDir;

namespace {

std::vector<std::pair<std::string, Group>> synthetic_ids(int n) {
  std::vector<std::pair<std::string, Group>> ids;
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%03d", i);
    ids.emplace_back(buf, static_cast<Group>(i % 3));
  }
  return ids;
}

struct TinyCohort {
  Cohort cohort;
  FoldAssignment folds;
  I2IModelConfig config;
};

TinyCohort tiny() {
  PhantomConfig pc;
  pc.dims = {8, 8, 8};
  pc.cn = 4;
  pc.mci = 4;
  pc.dementia = 2;
  pc.years = 3;
  TinyCohort t;
  std::vector<std::pair<std::string, Group>> ids;
  for (auto& s : generate_cohort(pc).subjects) {
    ids.emplace_back(s.record.id, s.record.group);
    t.cohort.emplace(s.record.id, std::move(s.record));
  }
  t.folds = make_folds(ids, 3);
  t.config.dims = pc.dims;
  t.config.lstm_filters = 2;
  t.config.decoder_filters = 2;
  return t;
}

}  // namespace

TEST_CASE("161 subjects split into folds of 33,32,32,32,32") {
  FoldAssignment f = make_folds(synthetic_ids(161), 1);
  std::vector<std::size_t> sizes;
  for (const auto& r : f.rounds) sizes.push_back(r.test.size());
  CHECK(sizes == std::vector<std::size_t>{33, 32, 32, 32, 32});
}

TEST_CASE("fold properties over random cohorts") {
  Rng rng(12);
  std::uniform_int_distribution<int> size(5, 120);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = size(rng);
    auto ids = synthetic_ids(n);
    FoldAssignment f = make_folds(ids, trial);
    std::map<std::string, int> tested;
    for (std::size_t k = 0; k < f.rounds.size(); ++k) {
      const FoldRound& r = f.rounds[k];
      std::set<std::string> train(r.train.begin(), r.train.end()), val(r.val.begin(), r.val.end());
      CHECK(r.train.size() + r.val.size() + r.test.size() == static_cast<std::size_t>(n));
      for (const auto& id : r.test) {
        ++tested[id];
        CHECK(!train.count(id));
        CHECK(!val.count(id));
      }
      for (const auto& id : r.val) CHECK(!train.count(id));
      const std::size_t rest = r.train.size() + r.val.size();
      CHECK(r.val.size() == (rest + 4) / 5);
    }
    CHECK(tested.size() == static_cast<std::size_t>(n));
    for (const auto& [id, c] : tested) CHECK(c == 1);
    // Sizes balanced overall and within each group.
    std::map<Group, std::vector<int>> per_group;
    std::vector<int> overall(5, 0);
    for (const auto& [id, k] : f.fold_of) {
      ++overall[k];
      auto& v = per_group[f.group_of.at(id)];
      v.resize(5, 0);
      ++v[k];
    }
    CHECK(*std::max_element(overall.begin(), overall.end()) - *std::min_element(overall.begin(), overall.end()) <= 1);
    for (auto& [g, v] : per_group) CHECK(*std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end()) <= 1);
    CHECK(make_folds(ids, trial).to_json() == f.to_json());
  }
}

TEST_CASE("too few subjects is an input error") {
  try {
    make_folds(synthetic_ids(4), 1);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInput);
  }
}

TEST_CASE("fold files round trip") {
  ScratchDir dir("folds");
  FoldAssignment f = make_folds(synthetic_ids(17), 9);
  f.save(dir / "folds.json");
  CHECK(FoldAssignment::load(dir / "folds.json").to_json() == f.to_json());
}

TEST_CASE("zero epochs returns the initialization") {
  TinyCohort t = tiny();
  TrainHyper h;
  h.epochs = 0;
  h.copies = 1;
  TrainReport r = train_fold(t.cohort, t.folds, 0, t.config, h, 5);
  CHECK(r.best_epoch == 0);
  CHECK(r.model.params.equals(init_model(t.config, derive_seed(5, "init", 0))));
  CHECK(r.train_triplets == 2 * t.folds.rounds[0].train.size());
}

TEST_CASE("short training is deterministic and finite") {
  TinyCohort t = tiny();
  TrainHyper h;
  h.epochs = 3;
  h.batch = 3;
  h.copies = 1;
  h.adam.learning_rate = 1e-2;
  TrainReport a = train_fold(t.cohort, t.folds, 1, t.config, h, 5);
  TrainReport b = train_fold(t.cohort, t.folds, 1, t.config, h, 5);
  REQUIRE(a.train_loss.size() == 3);
  CHECK(a.train_loss == b.train_loss);
  CHECK(a.val_mae == b.val_mae);
  CHECK(a.model.params.equals(b.model.params));
  CHECK(std::isfinite(a.train_loss[0]));
  CHECK(a.train_loss[0] > 0.0);
  CHECK(a.best_epoch >= 1);
  CHECK(a.val_mae[a.best_epoch - 1] == *std::min_element(a.val_mae.begin(), a.val_mae.end()));
  // The kept checkpoint reproduces its recorded validation score.
  CHECK(validation_mae(a.model, t.cohort, t.folds.rounds[1].val) == a.val_mae[a.best_epoch - 1]);

  ScratchDir dir("train");
  a.write_csv(dir / "r.csv");
  std::ifstream in(dir / "r.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,train_loss,val_mae,best");
}

TEST_CASE("cross validation covers every subject once with distinct models") {
  TinyCohort t = tiny();
  TrainHyper h;
  h.epochs = 1;
  h.batch = 4;
  h.copies = 0;
  auto results = cross_validate(t.cohort, t.folds, t.config, h, 2);
  REQUIRE(results.size() == 5);
  std::set<std::string> seen;
  for (std::size_t k = 0; k < results.size(); ++k) {
    for (const auto& [id, v] : results[k].test_predictions) {
      CHECK(seen.insert(id).second);
      CHECK(v.dims() == t.config.dims);
      CHECK(v.min() >= 0.0);
    }
    for (std::size_t j = 0; j < k; ++j) CHECK(!results[k].report.model.params.equals(results[j].report.model.params));
  }
  CHECK(seen.size() == t.cohort.size());
  CHECK(model_path("out", 3).filename() == "model_3.bin");
}

TEST_CASE("subject with the wrong dims is a shape error") {
  TinyCohort t = tiny();
  t.config.dims = {8, 8, 6};
  TrainHyper h;
  h.epochs = 1;
  CHECK_THROWS_AS(train_fold(t.cohort, t.folds, 0, t.config, h, 1), Error);
}
