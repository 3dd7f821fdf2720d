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

#include "longipet/augment.hpp"

#include <cmath>

#include "longipet/error.hpp"

namespace longipet {

using nlohmann::json;
using Mat3 = std::array<std::array<double, 3>, 3>;

namespace {

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

Mat3 rotation(int axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r{};
  r[axis][axis] = 1.0;
  const int u = (axis + 1) % 3;
  const int v = (axis + 2) % 3;
  r[u][u] = c;
  r[u][v] = -s;
  r[v][u] = s;
  r[v][v] = c;
  return r;
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

bool AffineAugmentation::within(const AugmentationRanges& r) const {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(rotation_radians[i]) > r.max_rotation) return false;
    if (zoom[i] < r.min_zoom || zoom[i] > r.max_zoom) return false;
    if (std::abs(shift_voxels[i]) > r.max_shift) return false;
  }
  return true;
}

json AffineAugmentation::to_json() const {
  return json{{"rotation_radians", rotation_radians}, {"zoom", zoom}, {"shift_voxels", shift_voxels}};
}

AffineAugmentation AffineAugmentation::from_json(const json& j) {
  AffineAugmentation a;
  try {
    a.rotation_radians = j.at("rotation_radians").get<std::array<double, 3>>();
    a.zoom = j.at("zoom").get<std::array<double, 3>>();
    a.shift_voxels = j.at("shift_voxels").get<std::array<double, 3>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("augmentation record: ") + e.what());
  }
  return a;
}

AffineAugmentation sample_augmentation(Rng& rng, const AugmentationRanges& ranges) {
  AffineAugmentation a;
  for (double& r : a.rotation_radians) r = uniform(rng, -ranges.max_rotation, ranges.max_rotation);
  if (ranges.anisotropic_zoom) {
    for (double& z : a.zoom) z = uniform(rng, ranges.min_zoom, ranges.max_zoom);
  } else {
    a.zoom.fill(uniform(rng, ranges.min_zoom, ranges.max_zoom));
  }
  for (double& s : a.shift_voxels) s = uniform(rng, -ranges.max_shift, ranges.max_shift);
  return a;
}

Volume3D apply_affine(const Volume3D& vol, const AffineAugmentation& aug) {
  const Dims3 d = vol.dims();
  const Mat3 r = multiply(rotation(2, aug.rotation_radians[2]),
                          multiply(rotation(1, aug.rotation_radians[1]),
                                   rotation(0, aug.rotation_radians[0])));
  for (double z : aug.zoom) check(z > 0.0, ErrorKind::kParameter, "zoom must be positive");
  const std::array<double, 3> centre = {(d.nx - 1) / 2.0, (d.ny - 1) / 2.0, (d.nz - 1) / 2.0};
  const std::array<int, 3> n = {d.nx, d.ny, d.nz};

  Volume3D out(d, 0.0, vol.affine());
  for (int z = 0; z < d.nz; ++z) {
    for (int y = 0; y < d.ny; ++y) {
      for (int x = 0; x < d.nx; ++x) {
        const std::array<double, 3> rel = {x - centre[0] - aug.shift_voxels[0],
                                           y - centre[1] - aug.shift_voxels[1],
                                           z - centre[2] - aug.shift_voxels[2]};
        // R is orthonormal: the inverse rotation is its transpose.
        std::array<double, 3> src;
        for (int i = 0; i < 3; ++i) {
          double acc = r[0][i] * rel[0] + r[1][i] * rel[1] + r[2][i] * rel[2];
          src[i] = acc / aug.zoom[i] + centre[i];
        }
        std::array<int, 3> base;
        std::array<double, 3> frac;
        bool outside = false;
        for (int i = 0; i < 3; ++i) {
          double f = std::floor(src[i]);
          base[i] = static_cast<int>(f);
          frac[i] = src[i] - f;
          if (base[i] < -1 || base[i] > n[i] - 1) outside = true;
        }
        if (outside) continue;
        double acc = 0.0;
        for (int corner = 0; corner < 8; ++corner) {
          const int cx = base[0] + (corner & 1);
          const int cy = base[1] + ((corner >> 1) & 1);
          const int cz = base[2] + ((corner >> 2) & 1);
          const double w = ((corner & 1) ? frac[0] : 1.0 - frac[0]) *
                           (((corner >> 1) & 1) ? frac[1] : 1.0 - frac[1]) *
                           (((corner >> 2) & 1) ? frac[2] : 1.0 - frac[2]);
          if (w == 0.0 || !vol.contains(cx, cy, cz)) continue;
          acc += w * vol.at(cx, cy, cz);
        }
        out.at(x, y, z) = acc;
      }
    }
  }
  return out;
}

std::vector<AugmentedRecord> augment_cohort(const std::vector<SubjectRecord>& records,
                                            std::uint64_t master_seed, int n_copies,
                                            const AugmentationRanges& ranges) {
  check(n_copies >= 0, ErrorKind::kParameter, "copies must be non-negative");
  for (const auto& r : records) {
    if (!r.has_years({0, 1, 2})) {
      fail(ErrorKind::kInput, "subject " + r.id + " lacks one of years 0, 1, 2");
    }
  }
  const std::size_t per_subject = static_cast<std::size_t>(n_copies);
  std::vector<AugmentedRecord> out(records.size() * (1 + per_subject));
  for (std::size_t s = 0; s < records.size(); ++s) {
    out[s].record = records[s];
    out[s].source_id = records[s].id;
  }
  parallel_for(records.size() * per_subject, [&](std::size_t job) {
    const std::size_t s = job / per_subject;
    const int copy = static_cast<int>(job % per_subject);
    const SubjectRecord& src = records[s];
    Rng rng(derive_seed(master_seed, src.id, static_cast<std::uint64_t>(copy)));
    AugmentedRecord& dst = out[records.size() + job];
    dst.transform = sample_augmentation(rng, ranges);
    dst.source_id = src.id;
    dst.copy_index = copy;
    dst.record.id = src.id + "#aug" + std::to_string(copy);
    dst.record.group = src.group;
    for (int year : {0, 1, 2}) dst.record.scans.emplace(year, apply_affine(src.scan(year), dst.transform));
  });
  return out;
}

}  // namespace longipet
