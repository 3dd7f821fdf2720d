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

#include "longipet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "longipet/error.hpp"
#include "longipet/hashing.hpp"
#include "longipet/linear_forecaster.hpp"
#include "longipet/metrics.hpp"
#include "longipet/parallel.hpp"
#include "longipet/volume_io.hpp"

namespace longipet {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_number(const std::string& s, const fs::path& path, std::size_t line) {
  if (s.empty()) return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

void write_json_file(const json& j, const fs::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

fs::path year_file(const fs::path& dir, const std::string& predictor, const std::string& id, int year) {
  return dir / predictor / id / ("year_" + std::to_string(year) + ".vol");
}

std::string path_label(const fs::path& p, const fs::path& base) {
  std::error_code ec;
  fs::path rel = fs::relative(p, base, ec);
  if (ec || rel.empty()) return p.generic_string();
  return rel.generic_string();
}

}  // namespace

// ---- metrics tables -------------------------------------------------------

void MetricsTable::write_csv(const fs::path& path) const {
  auto out = open_out(path);
  out << "subject_id,year,predictor,mae,ssim,group,meta_roi_suvr,gt_meta_roi_suvr";
  for (int l : region_labels) out << ",region_" << l << "_mae";
  out << "\n";
  for (const MetricsRow& r : rows) {
    out << r.subject_id << ',' << r.year << ',' << r.predictor << ',' << fmt(r.mae) << ',' << fmt(r.ssim) << ','
        << r.group << ',' << fmt(r.meta_roi_suvr) << ',' << fmt(r.gt_meta_roi_suvr);
    for (int l : region_labels) {
      auto it = r.region_mae.find(l);
      out << ',' << (it == r.region_mae.end() ? std::string() : fmt(it->second));
    }
    out << "\n";
  }
}

MetricsTable MetricsTable::read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open metrics file " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kFormat, path.string() + " is empty");
  const std::vector<std::string> header = split_csv(line);
  const std::vector<std::string> fixed = {"subject_id", "year", "predictor", "mae", "ssim"};
  if (header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    fail(ErrorKind::kFormat, path.string() + ": header must start with subject_id,year,predictor,mae,ssim");
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  MetricsTable t;
  std::vector<std::pair<int, std::size_t>> region_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& h = header[i];
    if (h.rfind("region_", 0) == 0 && h.size() > 11 && h.substr(h.size() - 4) == "_mae") {
      const int label = std::stoi(h.substr(7, h.size() - 11));
      t.region_labels.push_back(label);
      region_cols.emplace_back(label, i);
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != header.size()) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
    }
    MetricsRow r;
    r.subject_id = f[0];
    const double year = parse_number(f[1], path, line_no);
    if (!(year >= 0) || year != std::floor(year)) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": bad year");
    }
    r.year = static_cast<int>(year);
    r.predictor = f[2];
    r.mae = parse_number(f[3], path, line_no);
    r.ssim = parse_number(f[4], path, line_no);
    if (col.count("group")) r.group = f[col["group"]];
    if (col.count("meta_roi_suvr")) r.meta_roi_suvr = parse_number(f[col["meta_roi_suvr"]], path, line_no);
    if (col.count("gt_meta_roi_suvr")) r.gt_meta_roi_suvr = parse_number(f[col["gt_meta_roi_suvr"]], path, line_no);
    for (const auto& [label, i] : region_cols) {
      const double v = parse_number(f[i], path, line_no);
      if (!std::isnan(v)) r.region_mae[label] = v;
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

EvaluateResult evaluate(const EvaluateOptions& options) {
  const CohortManifest manifest = load_manifest(options.manifest);
  std::optional<Volume3D> atlas;
  std::optional<RoiDefinition> roi;
  std::optional<MaskVolume> brain;
  if (!options.atlas.empty()) atlas = read_volume(options.atlas);
  if (!options.roi.empty()) {
    if (!atlas) fail(ErrorKind::kParameter, "an ROI definition needs an atlas");
    roi = RoiDefinition::load(options.roi);
  }
  if (!options.brain_mask.empty()) brain = MaskVolume::from_volume(read_volume(options.brain_mask), MaskRole::kBrain);

  std::vector<std::string> predictors = options.predictors;
  if (predictors.empty()) {
    if (!fs::is_directory(options.predictions)) {
      fail(ErrorKind::kIo, "predictions directory " + options.predictions.string() + " not found");
    }
    for (const auto& e : fs::directory_iterator(options.predictions)) {
      if (e.is_directory() && parse_predictor(e.path().filename().string())) {
        predictors.push_back(e.path().filename().string());
      }
    }
    std::sort(predictors.begin(), predictors.end());
  }

  struct Task {
    const ManifestEntry* entry;
    int year;
    std::string predictor;
    fs::path file;
  };
  EvaluateResult result;
  std::vector<Task> tasks;
  for (const ManifestEntry& e : manifest.subjects) {
    for (const std::string& p : predictors) {
      for (const auto& [year, gt] : e.scans) {
        if (year < 2) continue;
        fs::path file = year_file(options.predictions, p, e.id, year);
        if (fs::exists(file)) {
          tasks.push_back({&e, year, p, file});
        } else {
          result.gaps.push_back({e.id, year, p});
        }
      }
      // Forecasts beyond the observed years are produced but never scored.
      const fs::path dir = options.predictions / p / e.id;
      if (fs::is_directory(dir)) {
        for (const auto& f : fs::directory_iterator(dir)) {
          const std::string name = f.path().filename().string();
          int year = -1;
          if (std::sscanf(name.c_str(), "year_%d.vol", &year) == 1 && name == "year_" + std::to_string(year) + ".vol" &&
              !e.scans.count(year)) {
            ++result.skipped_no_truth;
          }
        }
      }
    }
  }
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    return std::tie(a.entry->id, a.year, a.predictor) < std::tie(b.entry->id, b.year, b.predictor);
  });
  if (atlas) result.table.region_labels = atlas_labels(*atlas);

  std::vector<MetricsRow> rows(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const Task& t = tasks[i];
    const Volume3D truth = read_volume(t.entry->scans.at(t.year));
    const Volume3D pred = read_volume(t.file);
    MetricsRow& r = rows[i];
    r.subject_id = t.entry->id;
    r.year = t.year;
    r.predictor = t.predictor;
    r.group = group_name(t.entry->group);
    r.mae = mae(pred, truth, brain ? &*brain : nullptr);
    r.ssim = ssim3d(pred, truth);
    if (atlas) r.region_mae = regional_mae(pred, truth, *atlas);
    if (roi) {
      r.meta_roi_suvr = meta_roi_suvr(pred, *atlas, *roi);
      r.gt_meta_roi_suvr = meta_roi_suvr(truth, *atlas, *roi);
    }
  });
  result.table.rows = std::move(rows);
  return result;
}

// ---- statistics over a metrics table ---------------------------------------

std::optional<StatsTest> parse_stats_test(const std::string& name) {
  if (name == "wilcoxon") return StatsTest::kWilcoxon;
  if (name == "ttest") return StatsTest::kTTest;
  if (name == "anova") return StatsTest::kAnova;
  if (name == "chi2") return StatsTest::kChi2;
  if (name == "mixed") return StatsTest::kMixed;
  return std::nullopt;
}

namespace {

using RowIndex = std::map<int, std::map<std::string, std::map<std::string, const MetricsRow*>>>;  // year/pred/subject

RowIndex index_rows(const MetricsTable& table) {
  RowIndex idx;
  for (const MetricsRow& r : table.rows) {
    auto& slot = idx[r.year][r.predictor][r.subject_id];
    if (slot) {
      fail(ErrorKind::kInput, "duplicate metrics row for (" + r.subject_id + ", " + std::to_string(r.year) + ", " +
                                  r.predictor + ")");
    }
    slot = &r;
  }
  return idx;
}

StatsRow from_result(const std::string& test, int year, const std::string& effect, const std::string& group,
                     const stats::TestResult& t) {
  StatsRow r;
  r.test = test;
  r.year = year;
  r.effect = effect;
  r.group = group;
  r.statistic = t.statistic;
  r.value = t.value;
  r.p = t.p;
  r.n = t.n;
  if (t.df > 0) r.df = t.df;
  if (t.df2 > 0) r.df2 = t.df2;
  return r;
}

StatsRow note_row(const std::string& test, int year, const std::string& effect, const std::string& group,
                  const std::string& note) {
  StatsRow r;
  r.test = test;
  r.year = year;
  r.effect = effect;
  r.group = group;
  r.note = note;
  std::replace(r.note.begin(), r.note.end(), ',', ';');
  return r;
}

// Runs `f`, turning degenerate or input failures into a note row.
template <typename F>
void attempt(std::vector<StatsRow>& out, const std::string& test, int year, const std::string& effect,
             const std::string& group, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDegenerate && e.kind() != ErrorKind::kInput) throw;
    out.push_back(note_row(test, year, effect, group, e.what()));
  }
}

std::vector<std::string> groups_in(const MetricsTable& table) {
  std::vector<std::string> order;
  for (Group g : {Group::kCN, Group::kMCI, Group::kDementia}) {
    for (const MetricsRow& r : table.rows) {
      if (r.group == group_name(g)) {
        order.push_back(r.group);
        break;
      }
    }
  }
  return order;
}

}  // namespace

std::vector<StatsRow> run_stats(const MetricsTable& table, StatsTest test, double alpha) {
  const RowIndex idx = index_rows(table);
  const std::vector<std::string> groups = groups_in(table);
  std::vector<StatsRow> out;
  for (const auto& [year, by_pred] : idx) {
    std::vector<std::string> predictors;
    for (const auto& [p, rows] : by_pred) predictors.push_back(p);
    auto rows_of = [&](const std::string& p) -> const std::map<std::string, const MetricsRow*>* {
      auto it = by_pred.find(p);
      return it == by_pred.end() ? nullptr : &it->second;
    };
    switch (test) {
      case StatsTest::kWilcoxon: {
        const auto* a = rows_of("i2i");
        const auto* b = rows_of("linear");
        if (!a || !b) {
          out.push_back(note_row("wilcoxon", year, "i2i vs linear", "all", "needs both i2i and linear rows"));
          break;
        }
        for (const char* metric : {"mae", "ssim"}) {
          std::vector<double> x, y;
          for (const auto& [id, ra] : *a) {
            auto it = b->find(id);
            if (it == b->end()) continue;
            const bool is_mae = std::string(metric) == "mae";
            x.push_back(is_mae ? ra->mae : ra->ssim);
            y.push_back(is_mae ? it->second->mae : it->second->ssim);
          }
          const std::string effect = std::string(metric) + ": i2i vs linear";
          attempt(out, "wilcoxon", year, effect, "all",
                  [&] { out.push_back(from_result("wilcoxon", year, effect, "all", stats::wilcoxon_signed_rank(x, y))); });
        }
        break;
      }
      case StatsTest::kTTest: {
        std::vector<std::pair<std::string, std::string>> comparisons;
        for (const std::string& g : groups)
          for (const std::string& p : predictors) comparisons.emplace_back(g, p);
        if (comparisons.empty()) break;
        const double adjusted = stats::bonferroni(alpha, static_cast<int>(comparisons.size()));
        for (const auto& [g, p] : comparisons) {
          std::vector<double> truth, pred;
          for (const auto& [id, r] : *rows_of(p)) {
            if (r->group != g || std::isnan(r->gt_meta_roi_suvr) || std::isnan(r->meta_roi_suvr)) continue;
            truth.push_back(r->gt_meta_roi_suvr);
            pred.push_back(r->meta_roi_suvr);
          }
          const std::string effect = "meta_roi_suvr: ground_truth vs " + p;
          attempt(out, "ttest", year, effect, g,
                  [&] { out.push_back(from_result("ttest", year, effect, g, stats::paired_t(truth, pred))); });
          out.back().alpha = adjusted;
        }
        break;
      }
      case StatsTest::kAnova: {
        for (const std::string& p : predictors) {
          std::vector<std::vector<double>> samples;
          for (const std::string& g : groups) {
            std::vector<double> v;
            for (const auto& [id, r] : *rows_of(p)) {
              if (r->group == g) v.push_back(r->mae);
            }
            if (v.size() >= 2) samples.push_back(std::move(v));
          }
          const std::string effect = "mae by group: " + p;
          attempt(out, "anova", year, effect, "all",
                  [&] { out.push_back(from_result("anova", year, effect, "all", stats::one_way_anova(samples))); });
        }
        break;
      }
      case StatsTest::kChi2: {
        const auto* a = rows_of("i2i");
        const auto* b = rows_of("linear");
        if (!a || !b) {
          out.push_back(note_row("chi2", year, "group x i2i_better", "all", "needs both i2i and linear rows"));
          break;
        }
        std::vector<std::vector<double>> counts;
        for (const std::string& g : groups) {
          std::vector<double> row = {0.0, 0.0};
          for (const auto& [id, ra] : *a) {
            auto it = b->find(id);
            if (it == b->end() || ra->group != g) continue;
            row[ra->mae < it->second->mae ? 0 : 1] += 1.0;
          }
          if (row[0] + row[1] > 0) counts.push_back(row);
        }
        attempt(out, "chi2", year, "group x i2i_better", "all", [&] {
          out.push_back(from_result("chi2", year, "group x i2i_better", "all", stats::chi_square_independence(counts)));
        });
        break;
      }
      case StatsTest::kMixed: {
        // Levels: ground truth, then each predictor, over subjects present in all.
        std::set<std::string> common;
        bool first = true;
        for (const std::string& p : predictors) {
          std::set<std::string> ids;
          for (const auto& [id, r] : *rows_of(p)) {
            if (!std::isnan(r->meta_roi_suvr) && !std::isnan(r->gt_meta_roi_suvr)) ids.insert(id);
          }
          if (first) {
            common = ids;
            first = false;
          } else {
            std::set<std::string> keep;
            std::set_intersection(common.begin(), common.end(), ids.begin(), ids.end(),
                                  std::inserter(keep, keep.begin()));
            common = std::move(keep);
          }
        }
        std::vector<std::vector<double>> values;
        std::vector<int> group_ids;
        for (const std::string& id : common) {
          const MetricsRow* any = rows_of(predictors.front())->at(id);
          std::vector<double> v = {any->gt_meta_roi_suvr};
          for (const std::string& p : predictors) v.push_back(rows_of(p)->at(id)->meta_roi_suvr);
          values.push_back(std::move(v));
          group_ids.push_back(static_cast<int>(std::find(groups.begin(), groups.end(), any->group) - groups.begin()));
        }
        attempt(out, "mixed", year, "meta_roi_suvr", "all", [&] {
          const stats::MixedAnovaResult m = stats::mixed_anova(values, group_ids);
          out.push_back(from_result("mixed", year, "group", "all", m.between));
          out.push_back(from_result("mixed", year, "model", "all", m.within));
          out.push_back(from_result("mixed", year, "group x model", "all", m.interaction));
        });
        break;
      }
    }
  }
  return out;
}

void write_stats_csv(const std::vector<StatsRow>& rows, const fs::path& path) {
  auto out = open_out(path);
  out << "test,year,effect,group,statistic,value,df,df2,p,n,alpha,note\n";
  for (const StatsRow& r : rows) {
    out << r.test << ',' << r.year << ',' << r.effect << ',' << r.group << ',' << r.statistic << ',' << fmt(r.value)
        << ',' << fmt(r.df) << ',' << fmt(r.df2) << ',' << fmt(r.p) << ',' << r.n << ',' << fmt(r.alpha) << ','
        << r.note << "\n";
  }
}

// ---- run records -----------------------------------------------------------

json RunRecord::to_json(const fs::path& base) const {
  json in = json::array();
  for (const fs::path& p : inputs) {
    json e = {{"path", path_label(p, base)}};
    if (fs::is_regular_file(p)) e["sha256"] = sha256_file(p);
    in.push_back(e);
  }
  std::vector<fs::path> sorted = artifacts;
  std::sort(sorted.begin(), sorted.end());
  json art = json::array();
  for (const fs::path& p : sorted) art.push_back({{"path", path_label(p, base)}, {"sha256", sha256_file(p)}});
  json j = {{"format", "longipet-run"}, {"version", 1}, {"command", command}, {"flags", flags},
            {"inputs", in}, {"artifacts", art}};
  j["seed"] = seed ? json(*seed) : json(nullptr);
  return j;
}

json RunRecord::write(const fs::path& out, bool out_is_dir) const {
  const fs::path base = out_is_dir ? out : (out.has_parent_path() ? out.parent_path() : fs::path("."));
  const fs::path target = out_is_dir ? out / "run_manifest.json" : fs::path(out.string() + ".run.json");
  json j = to_json(base);
  write_json_file(j, target);
  return j;
}

Cohort load_cohort(const CohortManifest& manifest) {
  std::vector<SubjectRecord> records(manifest.subjects.size());
  parallel_for(records.size(), [&](std::size_t i) { records[i] = load_subject(manifest.subjects[i]); });
  Cohort cohort;
  for (SubjectRecord& r : records) cohort.emplace(r.id, std::move(r));
  return cohort;
}

// ---- drivers ---------------------------------------------------------------

namespace {

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "run_manifest.json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string safe_dir_name(std::string id) {
  for (char& c : id) {
    if (c == '#' || c == '/' || c == '\\') c = '_';
  }
  return id;
}

}  // namespace

json run_phantom(const PhantomRun& run) {
  const PhantomCohort cohort = generate_cohort(run.config);
  write_cohort(cohort, run.out);
  RunRecord rec;
  rec.command = "phantom";
  rec.flags = run.config.to_json();
  rec.seed = run.config.seed;
  rec.artifacts = files_under(run.out);
  return rec.write(run.out, true);
}

json run_preprocess(const PreprocessRun& run) {
  const CohortManifest manifest = load_manifest(run.manifest);
  const MaskVolume reference = MaskVolume::from_volume(read_volume(run.reference_mask), MaskRole::kReferenceRegion);
  const MaskVolume brain = MaskVolume::from_volume(read_volume(run.brain_mask), MaskRole::kBrain);
  CohortManifest result;
  std::vector<std::pair<const ManifestEntry*, int>> jobs;
  for (const ManifestEntry& e : manifest.subjects) {
    ManifestEntry copy = e;
    copy.scans.clear();
    for (const auto& [year, p] : e.scans) {
      jobs.emplace_back(&e, year);
      copy.scans.emplace(year, run.out / "subjects" / safe_dir_name(e.id) / ("year_" + std::to_string(year) + ".vol"));
    }
    result.subjects.push_back(std::move(copy));
  }
  parallel_for(jobs.size(), [&](std::size_t i) {
    const auto [e, year] = jobs[i];
    const Volume3D out = preprocess_scan(read_volume(e->scans.at(year)), reference, brain, run.options);
    write_volume(out, run.out / "subjects" / safe_dir_name(e->id) / ("year_" + std::to_string(year) + ".vol"));
  });
  save_manifest(result, run.out / "manifest.json");
  RunRecord rec;
  rec.command = "preprocess";
  rec.flags = {{"fwhm", run.options.fwhm_voxels},
               {"order", run.options.order == PipelineOrder::kSuvrMaskSmooth ? "suvr,mask,smooth" : "suvr,smooth,mask"},
               {"pad", run.options.pad}};
  rec.inputs = {run.manifest, run.reference_mask, run.brain_mask};
  rec.artifacts = files_under(run.out);
  return rec.write(run.out, true);
}

json run_augment(const AugmentRun& run) {
  const CohortManifest manifest = load_manifest(run.manifest);
  std::vector<SubjectRecord> records;
  for (const ManifestEntry& e : manifest.subjects) {
    if (e.training_eligible()) records.push_back(load_subject(e));
  }
  const std::vector<AugmentedRecord> augmented = augment_cohort(records, run.seed, run.copies, run.ranges);
  CohortManifest result;
  for (const AugmentedRecord& a : augmented) {
    ManifestEntry e;
    e.id = a.record.id;
    e.group = a.record.group;
    e.annotations = {{"source_id", a.source_id}, {"copy_index", a.copy_index}, {"transform", a.transform.to_json()}};
    for (const auto& [year, vol] : a.record.scans) {
      const fs::path p = run.out / "subjects" / safe_dir_name(a.record.id) / ("year_" + std::to_string(year) + ".vol");
      write_volume(vol, p);
      e.scans.emplace(year, p);
    }
    result.subjects.push_back(std::move(e));
  }
  save_manifest(result, run.out / "manifest.json");
  RunRecord rec;
  rec.command = "augment";
  rec.flags = {{"copies", run.copies},
               {"max_rotation", run.ranges.max_rotation},
               {"zoom", {run.ranges.min_zoom, run.ranges.max_zoom}},
               {"max_shift", run.ranges.max_shift},
               {"anisotropic_zoom", run.ranges.anisotropic_zoom}};
  rec.seed = run.seed;
  rec.inputs = {run.manifest};
  rec.artifacts = files_under(run.out);
  return rec.write(run.out, true);
}

json run_train(const TrainRun& run) {
  const CohortManifest manifest = load_manifest(run.manifest);
  CohortManifest eligible;
  for (const ManifestEntry& e : manifest.subjects) {
    if (e.training_eligible()) eligible.subjects.push_back(e);
  }
  const Cohort cohort = load_cohort(eligible);
  check(!cohort.empty(), ErrorKind::kInput, "no subject has years 0, 1 and 2");

  I2IModelConfig config;
  json config_j = json::object();
  if (!run.config.empty()) config_j = read_json_file(run.config);
  if (!config_j.contains("dims")) {
    const Dims3 d = cohort.begin()->second.scan(0).dims();
    config_j["dims"] = {d.nx, d.ny, d.nz};
  }
  if (run.lstm_filters) config_j["lstm_filters"] = *run.lstm_filters;
  if (run.decoder_filters) config_j["decoder_filters"] = *run.decoder_filters;
  config = I2IModelConfig::from_json(config_j);

  FoldAssignment folds = run.folds.empty() ? make_folds(manifest, run.seed) : FoldAssignment::load(run.folds);
  const std::vector<RoundResult> results = cross_validate(cohort, folds, config, run.hyper, run.seed);

  fs::create_directories(run.out);
  folds.save(run.out / "folds.json");
  for (const RoundResult& r : results) {
    const json meta = {{"round", r.report.round},
                       {"seed", run.seed},
                       {"best_epoch", r.report.best_epoch},
                       {"epochs", run.hyper.epochs},
                       {"batch", run.hyper.batch},
                       {"copies", run.hyper.copies},
                       {"learning_rate", run.hyper.adam.learning_rate},
                       {"train_triplets", r.report.train_triplets}};
    save_model(r.report.model, model_path(run.out, r.report.round), meta);
    r.report.write_csv(run.out / ("train_report_" + std::to_string(r.report.round) + ".csv"));
    for (const auto& [id, vol] : r.test_predictions) {
      write_volume(vol, year_file(run.out / "test_predictions", "i2i", id, 2));
    }
  }
  RunRecord rec;
  rec.command = "train";
  rec.flags = {{"model", config.to_json()},
               {"epochs", run.hyper.epochs},
               {"batch", run.hyper.batch},
               {"copies", run.hyper.copies},
               {"learning_rate", run.hyper.adam.learning_rate}};
  rec.seed = run.seed;
  rec.inputs = {run.manifest};
  if (!run.config.empty()) rec.inputs.push_back(run.config);
  if (!run.folds.empty()) rec.inputs.push_back(run.folds);
  rec.artifacts = files_under(run.out);
  return rec.write(run.out, true);
}

json run_predict(const PredictRun& run) {
  Volume3D y0 = read_volume(run.y0);
  Volume3D y1 = read_volume(run.y1);
  Volume3D out;
  RunRecord rec;
  rec.command = "predict";
  rec.inputs = {run.y0, run.y1};
  if (run.model == "linear") {
    out = predict_linear(y0, y1, LinearOptions{run.clamp});
    rec.flags = {{"model", "linear"}, {"clamp", run.clamp}};
  } else {
    const I2IModel model = load_model(run.model);
    // Odd-sized inputs are padded the same way preprocessing pads them.
    if (y0.dims() != model.config.dims) y0 = pad_to_even(y0);
    if (y1.dims() != model.config.dims) y1 = pad_to_even(y1);
    out = predict(model, y0, y1);
    rec.flags = {{"model", "i2i"}};
    rec.inputs.push_back(run.model);
  }
  write_volume(out, run.out);
  rec.artifacts = {run.out};
  if (format_for_path(run.out) == VolumeFormat::kRaw) rec.artifacts.push_back(raw_sidecar_path(run.out));
  return rec.write(run.out, false);
}

json run_forecast(const ForecastRun& run) {
  const CohortManifest manifest = load_manifest(run.manifest);
  CohortManifest usable;
  for (const ManifestEntry& e : manifest.subjects) {
    if (e.scans.count(0) && e.scans.count(1)) usable.subjects.push_back(e);
  }
  std::optional<FoldAssignment> folds;
  if (!run.folds.empty()) folds = FoldAssignment::load(run.folds);
  if (run.predictor == Predictor::kI2I && !folds) fail(ErrorKind::kPlan, "i2i forecasting needs --folds");
  const ForecastPlan plan = make_plan(run.predictor, usable.ids(), run.to_year, folds ? &*folds : nullptr,
                                      run.models, run.folds);
  const std::string name = predictor_name(run.predictor);
  fs::create_directories(run.out);
  write_json_file(plan.to_json(), run.out / (name + "_plan.json"));
  if (folds) {
    const LeakageReport audit = audit_leakage(plan, *folds);
    write_json_file(audit.to_json(), run.out / (name + "_leakage_audit.json"));
  }
  const Cohort cohort = load_cohort(usable);
  const auto forecasts = run_plan(plan, folds ? &*folds : nullptr, cohort, LinearOptions{run.clamp});
  for (const auto& [id, years] : forecasts) {
    for (const auto& [year, vol] : years) write_volume(vol, year_file(run.out, name, id, year));
  }
  RunRecord rec;
  rec.command = "forecast";
  rec.flags = {{"predictor", name}, {"to_year", run.to_year}, {"clamp", run.clamp}};
  rec.inputs = {run.manifest};
  if (folds) rec.inputs.push_back(run.folds);
  for (const PlanEntry& e : plan.entries) {
    if (!e.model_file.empty() &&
        std::find(rec.inputs.begin(), rec.inputs.end(), e.model_file) == rec.inputs.end()) {
      rec.inputs.push_back(e.model_file);
    }
  }
  rec.artifacts = files_under(run.out);
  return rec.write(run.out, true);
}

json run_evaluate(const EvaluateRun& run) {
  const EvaluateResult result = evaluate(run.options);
  result.table.write_csv(run.out);
  json gaps = json::array();
  for (const GapEntry& g : result.gaps) gaps.push_back({{"subject_id", g.subject_id}, {"year", g.year}, {"predictor", g.predictor}});
  const fs::path gap_path = fs::path(run.out.string() + ".gaps.json");
  write_json_file({{"missing_predictions", gaps}, {"forecasts_without_ground_truth", result.skipped_no_truth}}, gap_path);
  RunRecord rec;
  rec.command = "evaluate";
  rec.flags = {{"brain_mask_mae", !run.options.brain_mask.empty()}, {"predictors", run.options.predictors}};
  rec.inputs = {run.options.manifest};
  for (const fs::path& p : {run.options.atlas, run.options.roi, run.options.brain_mask}) {
    if (!p.empty()) rec.inputs.push_back(p);
  }
  rec.artifacts = {run.out, gap_path};
  return rec.write(run.out, false);
}

json run_stats_file(const StatsRun& run) {
  const MetricsTable table = MetricsTable::read_csv(run.input);
  write_stats_csv(run_stats(table, run.test, run.alpha), run.out);
  static const char* names[] = {"wilcoxon", "ttest", "anova", "chi2", "mixed"};
  RunRecord rec;
  rec.command = "stats";
  rec.flags = {{"test", names[static_cast<int>(run.test)]}, {"alpha", run.alpha}};
  rec.inputs = {run.input};
  rec.artifacts = {run.out};
  return rec.write(run.out, false);
}

json run_report(const ReportRun& run) {
  const MetricsTable table = MetricsTable::read_csv(run.metrics);
  auto out = open_out(run.out);
  out << render_report_svg(table);
  out.close();
  RunRecord rec;
  rec.command = "report";
  rec.inputs = {run.metrics};
  rec.artifacts = {run.out};
  return rec.write(run.out, false);
}

}  // namespace longipet
