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

#ifndef LONGIPET_PREPROCESS_HPP_
#define LONGIPET_PREPROCESS_HPP_

#include <array>
#include <vector>

#include "longipet/volume.hpp"

namespace longipet {

enum class MaskRole { kReferenceRegion, kBrain };

// Boolean membership over a grid. Built from a volume by thresholding at 0.5.
class MaskVolume {
 public:
  MaskVolume(Dims3 dims, std::vector<bool> members, MaskRole role);
  static MaskVolume from_volume(const Volume3D& vol, MaskRole role);

  const Dims3& dims() const { return dims_; }
  MaskRole role() const { return role_; }
  bool operator[](std::size_t i) const { return members_[i]; }
  std::size_t count() const { return count_; }

 private:
  Dims3 dims_;
  std::vector<bool> members_;
  MaskRole role_;
  std::size_t count_ = 0;
};

// vol / mean(vol over reference region).
Volume3D suvr_normalize(const Volume3D& vol, const MaskVolume& reference);

// Zeroes every voxel outside the mask.
Volume3D apply_brain_mask(const Volume3D& vol, const MaskVolume& brain);

// Per-axis 1D Gaussian taps for a full width at half maximum in voxels:
// sigma = fwhm / sqrt(8 ln 2), radius = ceil(3 sigma), normalized to sum 1.
std::vector<double> gaussian_kernel_1d(double fwhm_voxels);

// Separable Gaussian smoothing with zero-valued exterior.
Volume3D gaussian_smooth(const Volume3D& vol, std::array<double, 3> fwhm_voxels = {4.0, 4.0, 4.0});

enum class PipelineOrder { kSuvrMaskSmooth, kSuvrSmoothMask };

struct PreprocessOptions {
  std::array<double, 3> fwhm_voxels = {4.0, 4.0, 4.0};
  PipelineOrder order = PipelineOrder::kSuvrMaskSmooth;
  bool pad = true;
};

// SUVR normalization, brain masking and smoothing in the configured order,
// followed by even-dimension padding.
Volume3D preprocess_scan(const Volume3D& vol, const MaskVolume& reference,
                         const MaskVolume& brain, const PreprocessOptions& options = {});

}  // namespace longipet

#endif  // LONGIPET_PREPROCESS_HPP_
