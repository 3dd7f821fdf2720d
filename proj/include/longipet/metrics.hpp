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

#ifndef LONGIPET_METRICS_HPP_
#define LONGIPET_METRICS_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "longipet/preprocess.hpp"
#include "longipet/volume.hpp"

namespace longipet {

// Mean |a - b| over every voxel, or over the mask voxels when one is given.
double mae(const Volume3D& a, const Volume3D& b, const MaskVolume* mask = nullptr);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  // Unset: max(a, b) - min(a, b) over the pair.
  std::optional<double> dynamic_range;
};

// Mean of the SSIM map over the "valid" region, where the whole window fits
// inside the grid. Local statistics use a separable Gaussian window.
double ssim3d(const Volume3D& a, const Volume3D& b, const SsimOptions& options = {});

// Label -> MAE over voxels carrying that label. Label 0 is background and
// is skipped; labels with no voxels never appear.
std::map<int, double> regional_mae(const Volume3D& a, const Volume3D& b, const Volume3D& atlas);

struct RoiDefinition {
  std::string name = "meta_roi";
  std::vector<int> labels;

  static RoiDefinition load(const std::filesystem::path& path);
};

// Mean of vol over the union of the ROI's label voxels.
double meta_roi_suvr(const Volume3D& vol, const Volume3D& atlas, const RoiDefinition& roi);

// Labels of an atlas volume present at least once (rounded to int, > 0).
std::vector<int> atlas_labels(const Volume3D& atlas);

}  // namespace longipet

#endif  // LONGIPET_METRICS_HPP_
