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

#include "longipet/forecaster.hpp"

#include <algorithm>
#include <set>

#include "longipet/error.hpp"
#include "longipet/parallel.hpp"

namespace longipet {

namespace fs = std::filesystem;
using nlohmann::json;

const char* predictor_name(Predictor p) { return p == Predictor::kI2I ? "i2i" : "linear"; }

std::optional<Predictor> parse_predictor(const std::string& name) {
  if (name == "i2i") return Predictor::kI2I;
  if (name == "linear") return Predictor::kLinear;
  return std::nullopt;
}

std::map<int, Volume3D> forecast_recursive(const StepFn& step, const Volume3D& y0, const Volume3D& y1,
                                           int max_year) {
  check(max_year >= 2, ErrorKind::kParameter, "forecast horizon must reach at least year 2");
  require_same_dims(y0, y1, "forecast inputs");
  std::map<int, Volume3D> out;
  out.emplace(2, step(y0, y1));
  for (int k = 3; k <= max_year; ++k) {
    const Volume3D& prev2 = k == 3 ? y1 : out.at(k - 2);
    out.emplace(k, step(prev2, out.at(k - 1)));
  }
  return out;
}

json ForecastPlan::to_json() const {
  json entries_j = json::array();
  for (const PlanEntry& e : entries) {
    json j = {{"subject_id", e.subject_id}};
    if (predictor == Predictor::kI2I) {
      j["round"] = e.round;
      j["model"] = e.model_file.filename().string();
    }
    entries_j.push_back(j);
  }
  return json{{"predictor", predictor_name(predictor)},
              {"target_years", target_years},
              {"folds", folds_file.filename().string()},
              {"entries", entries_j}};
}

ForecastPlan make_plan(Predictor predictor, const std::vector<std::string>& subject_ids, int max_year,
                       const FoldAssignment* folds, const fs::path& models_dir, const fs::path& folds_file) {
  check(max_year >= 2, ErrorKind::kParameter, "forecast horizon must reach at least year 2");
  ForecastPlan plan;
  plan.predictor = predictor;
  plan.folds_file = folds_file;
  for (int k = 2; k <= max_year; ++k) plan.target_years.push_back(k);
  if (predictor == Predictor::kI2I && !folds) fail(ErrorKind::kPlan, "i2i forecasting needs a fold assignment");
  for (const std::string& id : subject_ids) {
    PlanEntry e;
    e.subject_id = id;
    if (predictor == Predictor::kI2I) {
      auto it = folds->fold_of.find(id);
      e.round = it == folds->fold_of.end() ? 0 : it->second;
      e.model_file = model_path(models_dir, e.round);
    }
    plan.entries.push_back(std::move(e));
  }
  return plan;
}

std::vector<std::string> LeakageReport::failing_subjects() const {
  std::vector<std::string> out;
  for (const LeakageItem& i : items) {
    if (!i.ok) out.push_back(i.subject_id);
  }
  return out;
}

json LeakageReport::to_json() const {
  json items_j = json::array();
  for (const LeakageItem& i : items) {
    items_j.push_back({{"subject_id", i.subject_id}, {"round", i.round}, {"ok", i.ok}, {"detail", i.detail}});
  }
  return json{{"pass", pass}, {"items", items_j}};
}

LeakageReport audit_leakage(const ForecastPlan& plan, const FoldAssignment& folds) {
  LeakageReport report;
  for (const PlanEntry& e : plan.entries) {
    LeakageItem item{e.subject_id, e.round, true, "ok"};
    if (plan.predictor == Predictor::kI2I) {
      if (e.round < 0 || e.round >= static_cast<int>(folds.rounds.size())) {
        item.ok = false;
        item.detail = "routed to nonexistent round " + std::to_string(e.round);
      } else {
        const FoldRound& r = folds.rounds[e.round];
        const bool in_train = std::find(r.train.begin(), r.train.end(), e.subject_id) != r.train.end();
        const bool in_val = std::find(r.val.begin(), r.val.end(), e.subject_id) != r.val.end();
        if (in_train || in_val) {
          item.ok = false;
          item.detail = std::string("subject is in the ") + (in_train ? "training" : "validation") +
                        " set of round " + std::to_string(e.round);
        }
      }
    } else {
      item.detail = "linear predictor has no trained state";
    }
    report.pass = report.pass && item.ok;
    report.items.push_back(std::move(item));
  }
  return report;
}

std::map<std::string, std::map<int, Volume3D>> run_plan(const ForecastPlan& plan, const FoldAssignment* folds,
                                                        const Cohort& cohort, const LinearOptions& linear) {
  check(!plan.target_years.empty(), ErrorKind::kPlan, "plan has no target years");
  const int max_year = plan.target_years.back();
  std::map<int, I2IModel> models;
  if (plan.predictor == Predictor::kI2I) {
    if (!folds) fail(ErrorKind::kPlan, "i2i forecasting needs a fold assignment");
    const LeakageReport audit = audit_leakage(plan, *folds);
    if (!audit.pass) {
      std::string names;
      for (const std::string& id : audit.failing_subjects()) names += (names.empty() ? "" : ", ") + id;
      fail(ErrorKind::kLeakage, "leakage audit failed for: " + names);
    }
    for (const PlanEntry& e : plan.entries) {
      if (models.count(e.round)) continue;
      if (!fs::exists(e.model_file)) {
        fail(ErrorKind::kPlan, "model file for round " + std::to_string(e.round) + " missing: " + e.model_file.string());
      }
      models.emplace(e.round, load_model(e.model_file));
    }
  }
  std::vector<std::map<int, Volume3D>> results(plan.entries.size());
  parallel_for(plan.entries.size(), [&](std::size_t i) {
    const PlanEntry& e = plan.entries[i];
    auto it = cohort.find(e.subject_id);
    if (it == cohort.end()) fail(ErrorKind::kPlan, "subject " + e.subject_id + " in plan but not loaded");
    const SubjectRecord& s = it->second;
    if (!s.has_years({0, 1})) fail(ErrorKind::kInput, "subject " + e.subject_id + " lacks years 0 and 1");
    StepFn step;
    if (plan.predictor == Predictor::kI2I) {
      const I2IModel& m = models.at(e.round);
      step = [&m](const Volume3D& a, const Volume3D& b) { return predict(m, a, b); };
    } else {
      step = [&linear](const Volume3D& a, const Volume3D& b) { return predict_linear(a, b, linear); };
    }
    results[i] = forecast_recursive(step, s.scan(0), s.scan(1), max_year);
  });
  std::map<std::string, std::map<int, Volume3D>> out;
  for (std::size_t i = 0; i < plan.entries.size(); ++i) out.emplace(plan.entries[i].subject_id, std::move(results[i]));
  return out;
}

}  // namespace longipet
