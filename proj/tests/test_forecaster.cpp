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

#include "doctest.h"
#include "longipet/error.hpp"
#include "longipet/forecaster.hpp"
#include "longipet/linear_forecaster.hpp"
#include "longipet/phantom.hpp"
#include "longipet/training.hpp"
#include "test_util.hpp"

using namespace longipet;
using longipet::testing::random_volume;
using longipet::testing::ScratchDir;

namespace {

StepFn linear_step() {
  return [](const Volume3D& a, const Volume3D& b) { return predict_linear(a, b); };
}

FoldAssignment folds_for(int n) {
  std::vector<std::pair<std::string, Group>> ids;
  for (int i = 0; i < n; ++i) ids.emplace_back("S" + std::to_string(i), static_cast<Group>(i % 3));
  return make_folds(ids, 4);
}

std::vector<std::string> ids_of(const FoldAssignment& f) {
  std::vector<std::string> ids;
  for (const auto& [id, k] : f.fold_of) ids.push_back(id);
  return ids;
}

}  // namespace

TEST_CASE("linear recursion on constant volumes") {
  Dims3 d{2, 2, 2};
  auto out = forecast_recursive(linear_step(), Volume3D(d, 1.2), Volume3D(d, 1.0), 7);
  REQUIRE(out.size() == 6);
  CHECK(out.at(2).values()[0] == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(out.at(3).values()[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(out.at(4).values()[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(std::abs(out.at(7).values()[0] - (-0.2)) < 1e-10);

  Volume3D same = random_volume(d, 5);
  for (const auto& [k, v] : forecast_recursive(linear_step(), same, same, 6)) CHECK(v.values() == same.values());
}

TEST_CASE("linear recursion matches the closed form") {
  Dims3 d{3, 4, 2};
  for (int trial = 0; trial < 10; ++trial) {
    Volume3D y0 = random_volume(d, trial), y1 = random_volume(d, 100 + trial);
    auto out = forecast_recursive(linear_step(), y0, y1, 9);
    for (const auto& [k, v] : out) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double closed = y1.values()[i] - (k - 1) * (y0.values()[i] - y1.values()[i]);
        CHECK(std::abs(v.values()[i] - closed) < 1e-10);
      }
    }
  }
}

TEST_CASE("year three pairs the real year one with the predicted year two") {
  Dims3 d{2, 2, 2};
  std::vector<std::pair<double, double>> calls;
  StepFn spy = [&](const Volume3D& a, const Volume3D& b) {
    calls.emplace_back(a.values()[0], b.values()[0]);
    return Volume3D(d, a.values()[0] + b.values()[0]);
  };
  forecast_recursive(spy, Volume3D(d, 1.0), Volume3D(d, 2.0), 4);
  REQUIRE(calls.size() == 3);
  CHECK(calls[0] == std::pair<double, double>{1.0, 2.0});
  CHECK(calls[1] == std::pair<double, double>{2.0, 3.0});
  CHECK(calls[2] == std::pair<double, double>{3.0, 5.0});
}

TEST_CASE("predictor names") {
  CHECK(parse_predictor("i2i") == Predictor::kI2I);
  CHECK(parse_predictor("linear") == Predictor::kLinear);
  CHECK(!parse_predictor("cnn").has_value());
  CHECK(std::string(predictor_name(Predictor::kI2I)) == "i2i");
}

TEST_CASE("leakage audit") {
  FoldAssignment f = folds_for(12);
  ForecastPlan plan = make_plan(Predictor::kI2I, ids_of(f), 5, &f, "models");
  SUBCASE("correct routing passes") {
    LeakageReport r = audit_leakage(plan, f);
    CHECK(r.pass);
    CHECK(r.items.size() == 12);
    for (const auto& e : plan.entries) CHECK(e.model_file == model_path("models", f.fold_of.at(e.subject_id)));
  }
  SUBCASE("routing into a training round fails naming the subject") {
    const std::string victim = plan.entries[3].subject_id;
    const int own = plan.entries[3].round;
    plan.entries[3].round = (own + 1) % 5;
    LeakageReport r = audit_leakage(plan, f);
    CHECK(!r.pass);
    REQUIRE(r.failing_subjects().size() == 1);
    CHECK(r.failing_subjects()[0] == victim);
    Cohort empty;
    try {
      run_plan(plan, &f, empty);
      FAIL("expected leakage error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kLeakage);
      CHECK(std::string(e.what()).find(victim) != std::string::npos);
    }
  }
  SUBCASE("empty plan passes vacuously") {
    ForecastPlan empty = make_plan(Predictor::kI2I, {}, 3, &f);
    CHECK(audit_leakage(empty, f).pass);
  }
  SUBCASE("unknown subjects route to round 0") {
    ForecastPlan p = make_plan(Predictor::kI2I, {"stranger"}, 3, &f);
    CHECK(p.entries[0].round == 0);
    CHECK(audit_leakage(p, f).pass);
  }
  SUBCASE("plan json") {
    auto j = plan.to_json();
    CHECK(j["entries"].size() == 12);
    CHECK(j["target_years"] == nlohmann::json({2, 3, 4, 5}));
  }
}

TEST_CASE("running plans") {
  PhantomConfig pc;
  pc.dims = {8, 8, 8};
  pc.cn = 3;
  pc.mci = 3;
  pc.dementia = 2;
  pc.years = 4;
  Cohort cohort;
  std::vector<std::pair<std::string, Group>> ids;
  for (auto& s : generate_cohort(pc).subjects) {
    ids.emplace_back(s.record.id, s.record.group);
    cohort.emplace(s.record.id, s.record);
  }
  FoldAssignment f = make_folds(ids, 1);
  std::vector<std::string> names;
  for (auto& [id, g] : ids) names.push_back(id);

  SUBCASE("linear plan") {
    auto out = run_plan(make_plan(Predictor::kLinear, names, 6), nullptr, cohort);
    REQUIRE(out.size() == names.size());
    for (const auto& [id, years] : out) {
      CHECK(years.size() == 5);
      auto direct = forecast_recursive(linear_step(), cohort.at(id).scan(0), cohort.at(id).scan(1), 6);
      for (const auto& [k, v] : years) CHECK(v.values() == direct.at(k).values());
    }
  }
  SUBCASE("i2i plan without model files is a plan error") {
    ScratchDir dir("plan");
    try {
      run_plan(make_plan(Predictor::kI2I, names, 3, &f, dir.path()), &f, cohort);
      FAIL("expected plan error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kPlan);
    }
  }
  SUBCASE("i2i plan with trained rounds") {
    ScratchDir dir("plan");
    I2IModelConfig c;
    c.dims = pc.dims;
    c.lstm_filters = 2;
    c.decoder_filters = 2;
    TrainHyper h;
    h.epochs = 1;
    h.copies = 0;
    for (int k = 0; k < 5; ++k) save_model(train_fold(cohort, f, k, c, h, 3).model, model_path(dir.path(), k));
    auto plan = make_plan(Predictor::kI2I, names, 5, &f, dir.path());
    auto a = run_plan(plan, &f, cohort), b = run_plan(plan, &f, cohort);
    for (const auto& [id, years] : a) {
      CHECK(years.size() == 4);
      for (const auto& [k, v] : years) {
        CHECK(v.dims() == pc.dims);
        CHECK(v.min() >= 0.0);
        CHECK(v.values() == b.at(id).at(k).values());
      }
    }
  }
}
