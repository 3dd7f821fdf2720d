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

#ifndef LONGIPET_PIPELINE_HPP_
#define LONGIPET_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "longipet/augment.hpp"
#include "longipet/forecaster.hpp"
#include "longipet/i2i_model.hpp"
#include "longipet/phantom.hpp"
#include "longipet/preprocess.hpp"
#include "longipet/stats.hpp"
#include "longipet/training.hpp"

namespace longipet {

namespace fs = std::filesystem;

// ---- metrics tables -------------------------------------------------------

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MetricsRow {
  std::string subject_id;
  int year = 0;
  std::string predictor;
  double mae = 0.0;
  double ssim = 0.0;
  std::string group;
  double meta_roi_suvr = kNaN;
  double gt_meta_roi_suvr = kNaN;
  std::map<int, double> region_mae;
};

// Columns: subject_id,year,predictor,mae,ssim,group,meta_roi_suvr,
// gt_meta_roi_suvr, then region_<label>_mae for each atlas label.
struct MetricsTable {
  std::vector<int> region_labels;
  std::vector<MetricsRow> rows;

  void write_csv(const fs::path& path) const;
  static MetricsTable read_csv(const fs::path& path);
};

struct GapEntry {
  std::string subject_id;
  int year = 0;
  std::string predictor;
};

struct EvaluateOptions {
  fs::path predictions;  // <predictions>/<predictor>/<subject>/year_<k>.vol
  fs::path manifest;
  fs::path atlas;        // optional
  fs::path roi;          // optional, needs atlas
  fs::path brain_mask;   // optional: brain-only MAE
  std::vector<std::string> predictors;  // empty: every predictor directory present
};

struct EvaluateResult {
  MetricsTable table;
  std::vector<GapEntry> gaps;         // evaluable years lacking a prediction
  std::size_t skipped_no_truth = 0;   // predictions with no ground truth
};

// Rows only for years >= 2 with ground truth; sorted by (subject, year,
// predictor).
EvaluateResult evaluate(const EvaluateOptions& options);

// ---- statistics over a metrics table ---------------------------------------

enum class StatsTest { kWilcoxon, kTTest, kAnova, kChi2, kMixed };
std::optional<StatsTest> parse_stats_test(const std::string& name);

struct StatsRow {
  std::string test;
  int year = 0;
  std::string effect;      // metric, comparison or ANOVA effect
  std::string group;       // "all" when pooled
  std::string statistic;
  double value = kNaN;
  double df = kNaN;
  double df2 = kNaN;
  double p = kNaN;
  std::size_t n = 0;
  double alpha = kNaN;     // Bonferroni-corrected threshold where applicable
  std::string note;
};

std::vector<StatsRow> run_stats(const MetricsTable& table, StatsTest test, double alpha = 0.05);
void write_stats_csv(const std::vector<StatsRow>& rows, const fs::path& path);

// ---- SVG report ------------------------------------------------------------

// MAE and SSIM across years per predictor, plus meta-ROI SUVR by group and
// source when those columns are present. A pure function of the table.
std::string render_report_svg(const MetricsTable& table);

// ---- subcommand drivers ----------------------------------------------------

// Every driver writes its artifacts and a run manifest (command, inputs with
// SHA-256, flags, seed, artifacts with SHA-256; no timestamps) and returns
// the manifest.
struct RunRecord {
  std::string command;
  nlohmann::json flags = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::vector<fs::path> inputs;
  std::vector<fs::path> artifacts;

  nlohmann::json to_json(const fs::path& base) const;
  // Writes <dir>/run_manifest.json, or <file>.run.json for single-file output.
  nlohmann::json write(const fs::path& out, bool out_is_dir) const;
};

struct PhantomRun {
  PhantomConfig config;
  fs::path out;
};
nlohmann::json run_phantom(const PhantomRun& run);

struct PreprocessRun {
  fs::path manifest;
  fs::path reference_mask;
  fs::path brain_mask;
  fs::path out;
  PreprocessOptions options;
};
nlohmann::json run_preprocess(const PreprocessRun& run);

struct AugmentRun {
  fs::path manifest;
  fs::path out;
  int copies = 2;
  std::uint64_t seed = 0;
  AugmentationRanges ranges;
};
nlohmann::json run_augment(const AugmentRun& run);

struct TrainRun {
  fs::path manifest;
  fs::path config;  // optional model config JSON; dims default to the data
  fs::path folds;   // optional existing assignment
  fs::path out;
  std::uint64_t seed = 0;
  TrainHyper hyper;
  std::optional<int> lstm_filters;
  std::optional<int> decoder_filters;
};
nlohmann::json run_train(const TrainRun& run);

struct PredictRun {
  std::string model;  // "linear" or a model file
  fs::path y0;
  fs::path y1;
  fs::path out;
  bool clamp = false;
};
nlohmann::json run_predict(const PredictRun& run);

struct ForecastRun {
  Predictor predictor = Predictor::kLinear;
  fs::path manifest;
  fs::path folds;
  fs::path models;
  int to_year = 7;
  fs::path out;
  bool clamp = false;
};
nlohmann::json run_forecast(const ForecastRun& run);

struct EvaluateRun {
  EvaluateOptions options;
  fs::path out;  // metrics CSV; gap report goes next to it
};
nlohmann::json run_evaluate(const EvaluateRun& run);

struct StatsRun {
  fs::path input;
  StatsTest test = StatsTest::kWilcoxon;
  fs::path out;
  double alpha = 0.05;
};
nlohmann::json run_stats_file(const StatsRun& run);

struct ReportRun {
  fs::path metrics;
  fs::path out;
};
nlohmann::json run_report(const ReportRun& run);

// Loads every subject of a manifest into memory.
Cohort load_cohort(const CohortManifest& manifest);

}  // namespace longipet

#endif  // LONGIPET_PIPELINE_HPP_
