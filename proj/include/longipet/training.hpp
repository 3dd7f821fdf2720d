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

#ifndef LONGIPET_TRAINING_HPP_
#define LONGIPET_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "longipet/augment.hpp"
#include "longipet/i2i_model.hpp"
#include "longipet/manifest.hpp"
#include "longipet/optim.hpp"

namespace longipet {

struct FoldRound {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

// Round k tests fold k; its remaining subjects split 80/20 into train/val.
struct FoldAssignment {
  int n_folds = 5;
  std::uint64_t seed = 0;
  std::map<std::string, int> fold_of;
  std::map<std::string, Group> group_of;
  std::vector<FoldRound> rounds;

  nlohmann::json to_json() const;
  static FoldAssignment from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static FoldAssignment load(const std::filesystem::path& path);
};

// Group-stratified: each group is shuffled by the seed, groups are
// concatenated and dealt round-robin into folds, so fold sizes differ by at
// most one overall and within each group. The val split of a round takes
// every fifth subject of the same stratified order (ceil(n/5) subjects).
FoldAssignment make_folds(const std::vector<std::pair<std::string, Group>>& subjects, std::uint64_t seed,
                          int n_folds = 5);
// Uses only training-eligible subjects (years 0, 1, 2 present).
FoldAssignment make_folds(const CohortManifest& manifest, std::uint64_t seed, int n_folds = 5);

struct TrainHyper {
  int batch = 8;
  int epochs = 70;
  int copies = 2;
  ad::AdamOptions adam;
  AugmentationRanges augmentation;
};

struct TrainReport {
  int round = 0;
  std::uint64_t seed = 0;
  std::vector<double> train_loss;  // per epoch, sample-weighted mean of batch losses
  std::vector<double> val_mae;     // per epoch, infer mode, un-augmented val subjects
  int best_epoch = 0;              // 1-based; 0 when no epoch ran
  std::size_t train_triplets = 0;
  I2IModel model;                  // best-validation checkpoint

  void write_csv(const std::filesystem::path& path) const;
};

// Subjects by id; every id named by the folds must be present with years 0..2.
using Cohort = std::map<std::string, SubjectRecord>;

TrainReport train_fold(const Cohort& cohort, const FoldAssignment& folds, int round,
                       const I2IModelConfig& config, const TrainHyper& hyper, std::uint64_t seed);

struct RoundResult {
  TrainReport report;
  std::map<std::string, Volume3D> test_predictions;  // year-2 forecasts
};

// All rounds, independent of each other and run concurrently.
std::vector<RoundResult> cross_validate(const Cohort& cohort, const FoldAssignment& folds,
                                        const I2IModelConfig& config, const TrainHyper& hyper,
                                        std::uint64_t seed);

// Mean volume-wide MAE of infer-mode year-2 predictions over `ids`.
double validation_mae(const I2IModel& model, const Cohort& cohort, const std::vector<std::string>& ids);

std::filesystem::path model_path(const std::filesystem::path& dir, int round);

}  // namespace longipet

#endif  // LONGIPET_TRAINING_HPP_
