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

#include <cmath>

#include "doctest.h"
#include "longipet/error.hpp"
#include "longipet/preprocess.hpp"
#include "test_util.hpp"

using namespace longipet;
using longipet::testing::random_volume;

namespace {

MaskVolume box_mask(Dims3 d, int lo, int hi, MaskRole role) {
  std::vector<bool> m(d.voxels(), false);
  Volume3D tmp(d);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        if (x >= lo && x < hi && y >= lo && y < hi && z >= lo && z < hi) m[tmp.index(x, y, z)] = true;
  return MaskVolume(d, m, role);
}

}  // namespace

TEST_CASE("suvr_normalize") {
  Dims3 d{4, 4, 4};
  SUBCASE("constant 2 becomes 1") {
    Volume3D out = suvr_normalize(Volume3D(d, 2.0), box_mask(d, 1, 3, MaskRole::kReferenceRegion));
    for (double v : out.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("reference mean 2 maps 5 to 2.5") {
    Volume3D v(d, 5.0);
    std::vector<bool> m(d.voxels(), false);
    m[0] = m[1] = m[2] = true;
    v.data()[0] = 1.0;
    v.data()[1] = 2.0;
    v.data()[2] = 3.0;
    Volume3D out = suvr_normalize(v, MaskVolume(d, m, MaskRole::kReferenceRegion));
    CHECK(out.values()[10] == 2.5);
    CHECK(out.values()[0] == 0.5);
  }
  SUBCASE("zero reference region is a normalization error") {
    Volume3D v(d, 0.0);
    v.data()[63] = 4.0;
    try {
      suvr_normalize(v, box_mask(d, 0, 2, MaskRole::kReferenceRegion));
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNormalization);
    }
  }
  SUBCASE("scale invariance") {
    Volume3D v = random_volume(d, 9, 0.1, 2.0);
    MaskVolume ref = box_mask(d, 0, 2, MaskRole::kReferenceRegion);
    for (double c : {0.01, 0.5, 3.0, 1e4}) {
      Volume3D scaled = v;
      for (double& x : scaled.data()) x *= c;
      Volume3D a = suvr_normalize(v, ref), b = suvr_normalize(scaled, ref);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) < 1e-12);
    }
  }
}

TEST_CASE("apply_brain_mask") {
  Dims3 d{5, 5, 5};
  Volume3D v = random_volume(d, 3, 0.5, 1.5);
  std::vector<bool> all(d.voxels(), true);
  CHECK(apply_brain_mask(v, MaskVolume(d, all, MaskRole::kBrain)).values() == v.values());
  all[0] = false;
  Volume3D corner = apply_brain_mask(v, MaskVolume(d, all, MaskRole::kBrain));
  CHECK(corner.values()[0] == 0.0);
  CHECK(corner.values()[1] == v.values()[1]);
  MaskVolume box = box_mask(d, 1, 4, MaskRole::kBrain);
  Volume3D out = apply_brain_mask(v, box);
  double outside = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!box[i]) outside += std::abs(out.values()[i]);
  CHECK(outside == 0.0);
}

TEST_CASE("gaussian kernel taps") {
  auto k = gaussian_kernel_1d(4.0);
  const double sigma = 4.0 / std::sqrt(8.0 * std::log(2.0));
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  REQUIRE(k.size() == static_cast<std::size_t>(2 * r + 1));
  double total = 0.0;
  for (int i = -r; i <= r; ++i) total += std::exp(-0.5 * i * i / (sigma * sigma));
  for (int i = -r; i <= r; ++i) {
    CHECK(k[i + r] == doctest::Approx(std::exp(-0.5 * i * i / (sigma * sigma)) / total).epsilon(1e-14));
  }
}

TEST_CASE("gaussian_smooth") {
  Dims3 d{21, 21, 21};
  const double sigma = 4.0 / std::sqrt(8.0 * std::log(2.0));
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  SUBCASE("impulse response is the separable kernel") {
    Volume3D v(d, 0.0);
    v.at(10, 10, 10) = 1.0;
    Volume3D out = gaussian_smooth(v);
    // Oracle: direct evaluation of the 3D product of normalized Gaussians.
    double norm1 = 0.0;
    for (int i = -r; i <= r; ++i) norm1 += std::exp(-0.5 * i * i / (sigma * sigma));
    double total = 0.0;
    for (int z = 0; z < 21; ++z)
      for (int y = 0; y < 21; ++y)
        for (int x = 0; x < 21; ++x) {
          int dx = x - 10, dy = y - 10, dz = z - 10;
          double expected = 0.0;
          if (std::abs(dx) <= r && std::abs(dy) <= r && std::abs(dz) <= r) {
            expected = std::exp(-0.5 * (dx * dx + dy * dy + dz * dz) / (sigma * sigma)) /
                       (norm1 * norm1 * norm1);
          }
          CHECK(std::abs(out.at(x, y, z) - expected) < 1e-15);
          total += out.at(x, y, z);
        }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
  SUBCASE("constant interior stays constant") {
    Volume3D v(d, 1.7);
    Volume3D out = gaussian_smooth(v);
    CHECK(std::abs(out.at(10, 10, 10) - 1.7) < 1e-12);
  }
  SUBCASE("commutes with scaling") {
    Volume3D v = random_volume({9, 8, 7}, 4);
    Volume3D s = v;
    for (double& x : s.data()) x *= 3.25;
    Volume3D a = gaussian_smooth(v), b = gaussian_smooth(s);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(3.25 * a.values()[i] - b.values()[i]) < 1e-12);
  }
}

TEST_CASE("full chain keeps nonnegative input nonnegative and pads") {
  Dims3 d{9, 10, 7};
  Volume3D v = random_volume(d, 21, 0.0, 3.0);
  MaskVolume ref = box_mask(d, 2, 4, MaskRole::kReferenceRegion);
  MaskVolume brain = box_mask(d, 1, 6, MaskRole::kBrain);
  for (PipelineOrder order : {PipelineOrder::kSuvrMaskSmooth, PipelineOrder::kSuvrSmoothMask}) {
    PreprocessOptions opt;
    opt.order = order;
    Volume3D out = preprocess_scan(v, ref, brain, opt);
    CHECK(out.dims() == Dims3{10, 10, 8});
    CHECK(out.min() >= 0.0);
    CHECK(out.all_finite());
  }
  PreprocessOptions nopad;
  nopad.pad = false;
  CHECK(preprocess_scan(v, ref, brain, nopad).dims() == d);
}
