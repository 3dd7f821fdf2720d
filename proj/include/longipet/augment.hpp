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

#ifndef LONGIPET_AUGMENT_HPP_
#define LONGIPET_AUGMENT_HPP_

#include <array>
#include <cstdint>
#include <numbers>
#include <vector>

#include "json.hpp"
#include "longipet/manifest.hpp"
#include "longipet/parallel.hpp"
#include "longipet/volume.hpp"

namespace longipet {

struct AugmentationRanges {
  double max_rotation = std::numbers::pi / 18.0;
  double min_zoom = 0.95;
  double max_zoom = 1.05;
  double max_shift = 3.0;
  // Independent zoom factor per axis instead of one isotropic factor.
  bool anisotropic_zoom = false;
};

// One random affine: rotations about x, y, z (radians), zoom and shift in
// voxels. With isotropic zoom all three zoom entries are equal.
struct AffineAugmentation {
  std::array<double, 3> rotation_radians = {0.0, 0.0, 0.0};
  std::array<double, 3> zoom = {1.0, 1.0, 1.0};
  std::array<double, 3> shift_voxels = {0.0, 0.0, 0.0};

  static AffineAugmentation identity() { return {}; }
  bool within(const AugmentationRanges& ranges) const;
  nlohmann::json to_json() const;
  static AffineAugmentation from_json(const nlohmann::json& j);
};

AffineAugmentation sample_augmentation(Rng& rng, const AugmentationRanges& ranges = {});

// output(p) = trilinear(vol, A^-1 p) with A = shift * R_z R_y R_x * zoom about
// the grid centre ((n-1)/2 per axis). Samples outside the grid read as 0.
Volume3D apply_affine(const Volume3D& vol, const AffineAugmentation& aug);

// Originals first, then for each subject `n_copies` augmented copies whose
// years 0..2 share one transform. Copy c of subject s draws from the stream
// derive_seed(master_seed, s.id, c). Copies get id "<id>#aug<c>".
struct AugmentedRecord {
  SubjectRecord record;
  std::string source_id;
  int copy_index = -1;  // -1 for the original
  AffineAugmentation transform;
};

std::vector<AugmentedRecord> augment_cohort(const std::vector<SubjectRecord>& records,
                                            std::uint64_t master_seed, int n_copies = 2,
                                            const AugmentationRanges& ranges = {});

}  // namespace longipet

#endif  // LONGIPET_AUGMENT_HPP_
