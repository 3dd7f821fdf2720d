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

#ifndef LONGIPET_FORECASTER_HPP_
#define LONGIPET_FORECASTER_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "longipet/i2i_model.hpp"
#include "longipet/linear_forecaster.hpp"
#include "longipet/training.hpp"
#include "longipet/volume.hpp"

namespace longipet {

enum class Predictor { kI2I, kLinear };
const char* predictor_name(Predictor p);
std::optional<Predictor> parse_predictor(const std::string& name);

// One-step predictor: (year k-2, year k-1) -> year k.
using StepFn = std::function<Volume3D(const Volume3D&, const Volume3D&)>;

// y2 = f(y0, y1), y3 = f(y1, y2^), then yk = f(yk-2^, yk-1^). Returns years
// 2..max_year.
std::map<int, Volume3D> forecast_recursive(const StepFn& step, const Volume3D& y0, const Volume3D& y1,
                                           int max_year);

struct PlanEntry {
  std::string subject_id;
  int round = -1;                   // i2i only
  std::filesystem::path model_file;  // i2i only
};

// Routes every subject to the model of the round in which it was tested.
// Subjects outside the fold assignment never entered any training set and
// are routed to round 0.
struct ForecastPlan {
  Predictor predictor = Predictor::kLinear;
  std::vector<int> target_years;
  std::filesystem::path folds_file;
  std::vector<PlanEntry> entries;

  nlohmann::json to_json() const;
};

ForecastPlan make_plan(Predictor predictor, const std::vector<std::string>& subject_ids, int max_year,
                       const FoldAssignment* folds = nullptr, const std::filesystem::path& models_dir = {},
                       const std::filesystem::path& folds_file = {});

struct LeakageItem {
  std::string subject_id;
  int round = -1;
  bool ok = true;
  std::string detail;
};

struct LeakageReport {
  bool pass = true;
  std::vector<LeakageItem> items;

  std::vector<std::string> failing_subjects() const;
  nlohmann::json to_json() const;
};

// For every i2i entry, the routed round's train and val sets must exclude the
// subject. Linear entries pass trivially; an empty plan passes vacuously.
LeakageReport audit_leakage(const ForecastPlan& plan, const FoldAssignment& folds);

// Runs a plan over loaded subjects (years 0 and 1 required). Audits first
// and refuses to predict on failure; missing model files are plan errors.
// i2i runs in inference mode only.
std::map<std::string, std::map<int, Volume3D>> run_plan(const ForecastPlan& plan, const FoldAssignment* folds,
                                                        const Cohort& cohort, const LinearOptions& linear = {});

}  // namespace longipet

#endif  // LONGIPET_FORECASTER_HPP_
