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

#ifndef LONGIPET_PHANTOM_HPP_
#define LONGIPET_PHANTOM_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "longipet/manifest.hpp"
#include "longipet/preprocess.hpp"
#include "longipet/volume.hpp"

namespace longipet {

// Synthetic longitudinal cohort. Each subject has a smooth base volume inside
// a box-shaped brain; a meta-ROI (union of atlas labels) carries an additive
// group trajectory:
//   CN        offset(t) = 0
//   Dementia  offset(t) = -beta * t
//   MCI       offset(t) = -gamma * t^2
// Gaussian noise is added inside the brain after the trajectory.
struct PhantomConfig {
  Dims3 dims{16, 16, 16};
  int cn = 8;
  int mci = 12;
  int dementia = 4;
  int years = 8;  // years 0 .. years-1
  double noise_sigma = 0.01;
  double beta = 0.04;
  double gamma = 0.015;
  double base_level = 1.2;
  int blob_count = 4;
  double blob_amplitude = 0.15;
  double blob_sigma_min = 3.0;
  double blob_sigma_max = 5.0;
  std::vector<int> roi_labels = {1, 2};
  std::uint64_t seed = 7;

  void validate() const;
  nlohmann::json to_json() const;
  static PhantomConfig from_json(const nlohmann::json& j);
};

struct PhantomSubject {
  SubjectRecord record;
  Volume3D base;  // noise-free year-0 volume
};

struct PhantomCohort {
  PhantomConfig config;
  std::vector<PhantomSubject> subjects;
  Volume3D atlas;  // labels 1..8 (octants of the brain box), 0 outside
  MaskVolume brain;
  MaskVolume reference;
  MaskVolume roi;
};

// Brain box [n/8, n - n/8) per axis.
MaskVolume phantom_brain_mask(const Dims3& dims);
Volume3D phantom_atlas(const Dims3& dims);

// Group ROI offset at year t.
double phantom_offset(const PhantomConfig& config, Group group, double t);

PhantomCohort generate_cohort(const PhantomConfig& config);

// Writes subjects/<id>/year_<k>.vol, atlas.vol, brain_mask.vol,
// reference_mask.vol, roi.json, phantom.json and manifest.json under `dir`.
// Returns the manifest path.
std::filesystem::path write_cohort(const PhantomCohort& cohort, const std::filesystem::path& dir);

}  // namespace longipet

#endif  // LONGIPET_PHANTOM_HPP_
