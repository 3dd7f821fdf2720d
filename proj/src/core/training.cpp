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

#include "longipet/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "longipet/error.hpp"
#include "longipet/metrics.hpp"
#include "longipet/parallel.hpp"

namespace longipet {

namespace fs = std::filesystem;
using ad::Tensor;
using nlohmann::json;

json FoldAssignment::to_json() const {
  json folds = json::object();
  for (const auto& [id, f] : fold_of) folds[id] = f;
  json groups = json::object();
  for (const auto& [id, g] : group_of) groups[id] = group_name(g);
  json rounds_j = json::array();
  for (const FoldRound& r : rounds) rounds_j.push_back({{"train", r.train}, {"val", r.val}, {"test", r.test}});
  return json{{"format", "longipet-folds"}, {"version", 1},     {"n_folds", n_folds},
              {"seed", seed},               {"folds", folds},   {"groups", groups},
              {"rounds", rounds_j}};
}

FoldAssignment FoldAssignment::from_json(const json& j) {
  FoldAssignment a;
  try {
    if (j.value("format", "") != "longipet-folds") fail(ErrorKind::kFormat, "not a fold assignment file");
    a.n_folds = j.at("n_folds").get<int>();
    a.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [id, f] : j.at("folds").items()) a.fold_of[id] = f.get<int>();
    for (const auto& [id, g] : j.at("groups").items()) {
      auto parsed = parse_group(g.get<std::string>());
      if (!parsed) fail(ErrorKind::kFormat, "unknown group for " + id);
      a.group_of[id] = *parsed;
    }
    for (const json& r : j.at("rounds")) {
      a.rounds.push_back({r.at("train").get<std::vector<std::string>>(), r.at("val").get<std::vector<std::string>>(),
                          r.at("test").get<std::vector<std::string>>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("fold assignment: ") + e.what());
  }
  if (static_cast<int>(a.rounds.size()) != a.n_folds) fail(ErrorKind::kFormat, "fold assignment round count mismatch");
  return a;
}

void FoldAssignment::save(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << to_json().dump(2) << "\n";
}

FoldAssignment FoldAssignment::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
  return from_json(j);
}

FoldAssignment make_folds(const std::vector<std::pair<std::string, Group>>& subjects, std::uint64_t seed,
                          int n_folds) {
  check(n_folds >= 2, ErrorKind::kParameter, "need at least 2 folds");
  if (static_cast<int>(subjects.size()) < n_folds) {
    fail(ErrorKind::kInput, "cross-validation needs at least " + std::to_string(n_folds) +
                                " eligible subjects, found " + std::to_string(subjects.size()));
  }
  FoldAssignment a;
  a.n_folds = n_folds;
  a.seed = seed;
  // Stratified order: groups in fixed order, each shuffled by its own stream.
  std::vector<std::string> order;
  for (Group g : {Group::kCN, Group::kMCI, Group::kDementia}) {
    std::vector<std::string> ids;
    for (const auto& [id, group] : subjects) {
      if (group == g) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    Rng rng(derive_seed(seed, std::string("folds/") + group_name(g)));
    std::shuffle(ids.begin(), ids.end(), rng);
    order.insert(order.end(), ids.begin(), ids.end());
  }
  for (const auto& [id, group] : subjects) {
    if (!a.group_of.emplace(id, group).second) fail(ErrorKind::kInput, "duplicate subject id " + id);
  }
  for (std::size_t i = 0; i < order.size(); ++i) a.fold_of[order[i]] = static_cast<int>(i % n_folds);
  a.rounds.resize(n_folds);
  for (int k = 0; k < n_folds; ++k) {
    FoldRound& r = a.rounds[k];
    std::vector<std::string> rest;
    for (const std::string& id : order) {
      (a.fold_of[id] == k ? r.test : rest).push_back(id);
    }
    for (std::size_t i = 0; i < rest.size(); ++i) (i % 5 == 0 ? r.val : r.train).push_back(rest[i]);
  }
  return a;
}

FoldAssignment make_folds(const CohortManifest& manifest, std::uint64_t seed, int n_folds) {
  std::vector<std::pair<std::string, Group>> eligible;
  for (const ManifestEntry& e : manifest.subjects) {
    if (e.training_eligible()) eligible.emplace_back(e.id, e.group);
  }
  return make_folds(eligible, seed, n_folds);
}

void TrainReport::write_csv(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << "epoch,train_loss,val_mae,best\n";
  char buf[96];
  for (std::size_t e = 0; e < train_loss.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%d\n", e + 1, train_loss[e], val_mae[e],
                  static_cast<int>(e + 1) == best_epoch ? 1 : 0);
    out << buf;
  }
}

namespace {

const SubjectRecord& subject(const Cohort& cohort, const std::string& id) {
  auto it = cohort.find(id);
  if (it == cohort.end()) fail(ErrorKind::kInput, "subject " + id + " named in folds but not loaded");
  if (!it->second.has_years({0, 1, 2})) fail(ErrorKind::kInput, "subject " + id + " lacks years 0..2");
  return it->second;
}

}  // namespace

double validation_mae(const I2IModel& model, const Cohort& cohort, const std::vector<std::string>& ids) {
  check(!ids.empty(), ErrorKind::kInput, "validation set is empty");
  std::vector<double> errs(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    const SubjectRecord& s = subject(cohort, ids[i]);
    errs[i] = mae(predict(model, s.scan(0), s.scan(1)), s.scan(2));
  });
  return std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
}

TrainReport train_fold(const Cohort& cohort, const FoldAssignment& folds, int round,
                       const I2IModelConfig& config, const TrainHyper& hyper, std::uint64_t seed) {
  check(round >= 0 && round < static_cast<int>(folds.rounds.size()), ErrorKind::kParameter,
        "round " + std::to_string(round) + " out of range");
  check(hyper.batch >= 1 && hyper.epochs >= 0 && hyper.copies >= 0, ErrorKind::kParameter,
        "batch >= 1, epochs >= 0 and copies >= 0 required");
  const FoldRound& r = folds.rounds[round];
  check(!r.train.empty(), ErrorKind::kInput, "round " + std::to_string(round) + " has no training subjects");

  std::vector<SubjectRecord> train_records;
  for (const std::string& id : r.train) {
    const SubjectRecord& s = subject(cohort, id);
    SubjectRecord t;
    t.id = s.id;
    t.group = s.group;
    for (int y : {0, 1, 2}) t.scans.emplace(y, s.scan(y));
    check(s.scan(0).dims() == config.dims, ErrorKind::kShape,
          "subject " + id + " dims " + to_string(s.scan(0).dims()) + " differ from model dims " +
              to_string(config.dims));
    train_records.push_back(std::move(t));
  }
  const std::vector<AugmentedRecord> triplets =
      augment_cohort(train_records, derive_seed(seed, "augment", round), hyper.copies, hyper.augmentation);

  TrainReport report;
  report.round = round;
  report.seed = seed;
  report.train_triplets = triplets.size();
  report.model.config = config;
  report.model.params = init_model(config, derive_seed(seed, "init", round));

  ad::ParameterSet& params = report.model.params;
  ad::AdamState adam;
  ad::ParameterSet best = params.clone();
  double best_val = 0.0;

  std::vector<std::size_t> order(triplets.size());
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "shuffle", round, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hyper.batch));
      std::vector<const Volume3D*> y0, y1, y2;
      for (std::size_t i = start; i < end; ++i) {
        const SubjectRecord& rec = triplets[order[i]].record;
        y0.push_back(&rec.scan(0));
        y1.push_back(&rec.scan(1));
        y2.push_back(&rec.scan(2));
      }
      Tensor pred = forward_batch(params, config, volumes_to_tensor(y0), volumes_to_tensor(y1), ad::Mode::kTrain);
      Tensor loss = ad::mae_loss(pred, volumes_to_tensor(y2));
      const double value = loss.values()[0];
      if (!std::isfinite(value)) {
        fail(ErrorKind::kDivergence, "non-finite training loss in round " + std::to_string(round) + ", epoch " +
                                         std::to_string(epoch) + ", batch starting at " + std::to_string(start));
      }
      params.zero_grad();
      loss.backward();
      ad::adam_step(params, adam, hyper.adam);
      loss_sum += value * static_cast<double>(end - start);
    }
    report.train_loss.push_back(loss_sum / static_cast<double>(order.size()));

    // Checkpoints live at float32 so saved models reproduce validation exactly.
    ad::ParameterSet snapshot = params.clone();
    snapshot.round_to_float32();
    const double val = validation_mae(I2IModel{config, snapshot}, cohort, r.val);
    if (!std::isfinite(val)) {
      fail(ErrorKind::kDivergence, "non-finite validation MAE in round " + std::to_string(round) + ", epoch " +
                                       std::to_string(epoch));
    }
    report.val_mae.push_back(val);
    if (report.best_epoch == 0 || val < best_val) {
      best_val = val;
      report.best_epoch = epoch;
      best = std::move(snapshot);
    }
  }
  report.model.params = std::move(best);
  return report;
}

std::vector<RoundResult> cross_validate(const Cohort& cohort, const FoldAssignment& folds,
                                        const I2IModelConfig& config, const TrainHyper& hyper,
                                        std::uint64_t seed) {
  std::vector<RoundResult> results(folds.rounds.size());
  parallel_for(folds.rounds.size(), [&](std::size_t k) {
    const int round = static_cast<int>(k);
    results[k].report = train_fold(cohort, folds, round, config, hyper, seed);
    for (const std::string& id : folds.rounds[k].test) {
      const SubjectRecord& s = subject(cohort, id);
      results[k].test_predictions.emplace(id, predict(results[k].report.model, s.scan(0), s.scan(1)));
    }
  });
  return results;
}

fs::path model_path(const fs::path& dir, int round) { return dir / ("model_" + std::to_string(round) + ".bin"); }

}  // namespace longipet
