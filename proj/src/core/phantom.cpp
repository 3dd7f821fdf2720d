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

#include "longipet/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "longipet/error.hpp"
#include "longipet/parallel.hpp"
#include "longipet/volume_io.hpp"

namespace longipet {

namespace fs = std::filesystem;
using nlohmann::json;

void PhantomConfig::validate() const {
  check(dims.positive(), ErrorKind::kParameter, "phantom dims must be positive");
  check(dims.nx % 2 == 0 && dims.ny % 2 == 0 && dims.nz % 2 == 0, ErrorKind::kParameter,
        "phantom dims must be even, got " + to_string(dims));
  check(dims.nx >= 8 && dims.ny >= 8 && dims.nz >= 8, ErrorKind::kParameter, "phantom dims must be at least 8");
  check(cn >= 0 && mci >= 0 && dementia >= 0, ErrorKind::kParameter, "subject counts must be nonnegative");
  check(years >= 1, ErrorKind::kParameter, "phantom needs at least one year");
  check(noise_sigma >= 0.0 && std::isfinite(noise_sigma), ErrorKind::kParameter, "noise sigma must be >= 0");
  check(blob_count >= 0 && blob_sigma_min > 0.0 && blob_sigma_max >= blob_sigma_min, ErrorKind::kParameter,
        "invalid blob parameters");
  check(!roi_labels.empty(), ErrorKind::kParameter, "ROI needs at least one label");
  for (int l : roi_labels) check(l >= 1 && l <= 8, ErrorKind::kParameter, "ROI labels must be in 1..8");
}

json PhantomConfig::to_json() const {
  return json{{"dims", {dims.nx, dims.ny, dims.nz}},
              {"cn", cn},
              {"mci", mci},
              {"dementia", dementia},
              {"years", years},
              {"noise_sigma", noise_sigma},
              {"beta", beta},
              {"gamma", gamma},
              {"base_level", base_level},
              {"blob_count", blob_count},
              {"blob_amplitude", blob_amplitude},
              {"blob_sigma_min", blob_sigma_min},
              {"blob_sigma_max", blob_sigma_max},
              {"roi_labels", roi_labels},
              {"seed", seed}};
}

PhantomConfig PhantomConfig::from_json(const json& j) {
  PhantomConfig c;
  try {
    if (j.contains("dims")) {
      auto d = j.at("dims").get<std::vector<int>>();
      check(d.size() == 3, ErrorKind::kParameter, "phantom dims must have 3 entries");
      c.dims = {d[0], d[1], d[2]};
    }
    c.cn = j.value("cn", c.cn);
    c.mci = j.value("mci", c.mci);
    c.dementia = j.value("dementia", c.dementia);
    c.years = j.value("years", c.years);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.beta = j.value("beta", c.beta);
    c.gamma = j.value("gamma", c.gamma);
    c.base_level = j.value("base_level", c.base_level);
    c.blob_count = j.value("blob_count", c.blob_count);
    c.blob_amplitude = j.value("blob_amplitude", c.blob_amplitude);
    c.blob_sigma_min = j.value("blob_sigma_min", c.blob_sigma_min);
    c.blob_sigma_max = j.value("blob_sigma_max", c.blob_sigma_max);
    c.roi_labels = j.value("roi_labels", c.roi_labels);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    fail(ErrorKind::kParameter, std::string("phantom config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

struct Box {
  int lo[3];
  int hi[3];
};

Box brain_box(const Dims3& d) {
  const int n[3] = {d.nx, d.ny, d.nz};
  Box b{};
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = n[a] / 8;
    b.hi[a] = n[a] - n[a] / 8;
  }
  return b;
}

bool inside(const Box& b, int x, int y, int z) {
  return x >= b.lo[0] && x < b.hi[0] && y >= b.lo[1] && y < b.hi[1] && z >= b.lo[2] && z < b.hi[2];
}

MaskVolume mask_where(const Dims3& dims, MaskRole role, const auto& pred) {
  std::vector<bool> m(dims.voxels());
  std::size_t i = 0;
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) m[i++] = pred(x, y, z);
  return MaskVolume(dims, std::move(m), role);
}

std::string subject_id(Group g, int index) {
  char buf[32];
  const char* prefix = g == Group::kCN ? "CN" : g == Group::kMCI ? "MCI" : "DEM";
  std::snprintf(buf, sizeof buf, "%s_%03d", prefix, index + 1);
  return buf;
}

}  // namespace

MaskVolume phantom_brain_mask(const Dims3& dims) {
  const Box b = brain_box(dims);
  return mask_where(dims, MaskRole::kBrain, [&](int x, int y, int z) { return inside(b, x, y, z); });
}

Volume3D phantom_atlas(const Dims3& dims) {
  const Box b = brain_box(dims);
  const int mid[3] = {dims.nx / 2, dims.ny / 2, dims.nz / 2};
  Volume3D atlas(dims, 0.0);
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        if (!inside(b, x, y, z)) continue;
        atlas.at(x, y, z) = 1 + (x >= mid[0]) + 2 * (y >= mid[1]) + 4 * (z >= mid[2]);
      }
  return atlas;
}

double phantom_offset(const PhantomConfig& config, Group group, double t) {
  switch (group) {
    case Group::kCN: return 0.0;
    case Group::kDementia: return -config.beta * t;
    case Group::kMCI: return -config.gamma * t * t;
  }
  return 0.0;
}

PhantomCohort generate_cohort(const PhantomConfig& config) {
  config.validate();
  const Dims3 dims = config.dims;
  const Box box = brain_box(dims);
  Volume3D atlas = phantom_atlas(dims);
  MaskVolume brain = phantom_brain_mask(dims);
  auto in_roi = [&](std::size_t i) {
    const int label = static_cast<int>(atlas.values()[i]);
    return std::find(config.roi_labels.begin(), config.roi_labels.end(), label) != config.roi_labels.end();
  };
  std::vector<bool> roi_bits(dims.voxels());
  for (std::size_t i = 0; i < roi_bits.size(); ++i) roi_bits[i] = in_roi(i);
  MaskVolume roi(dims, roi_bits, MaskRole::kBrain);
  // Reference region: a 2-voxel-thick slab at the centre of the highest
  // label not in the ROI, so its signal never follows a trajectory.
  int ref_label = 8;
  while (std::find(config.roi_labels.begin(), config.roi_labels.end(), ref_label) != config.roi_labels.end()) {
    --ref_label;
  }
  check(ref_label >= 1, ErrorKind::kParameter, "ROI covers every atlas label; no reference region left");
  MaskVolume reference = mask_where(dims, MaskRole::kReferenceRegion, [&](int x, int y, int z) {
    if (static_cast<int>(atlas.at(x, y, z)) != ref_label) return false;
    const int c[3] = {(ref_label - 1) & 1 ? (dims.nx / 2 + box.hi[0]) / 2 : (box.lo[0] + dims.nx / 2) / 2,
                      (ref_label - 1) & 2 ? (dims.ny / 2 + box.hi[1]) / 2 : (box.lo[1] + dims.ny / 2) / 2,
                      (ref_label - 1) & 4 ? (dims.nz / 2 + box.hi[2]) / 2 : (box.lo[2] + dims.nz / 2) / 2};
    return std::abs(x - c[0]) <= 1 && std::abs(y - c[1]) <= 1 && std::abs(z - c[2]) <= 1;
  });

  std::vector<std::pair<Group, int>> plan;
  for (int i = 0; i < config.cn; ++i) plan.emplace_back(Group::kCN, i);
  for (int i = 0; i < config.mci; ++i) plan.emplace_back(Group::kMCI, i);
  for (int i = 0; i < config.dementia; ++i) plan.emplace_back(Group::kDementia, i);

  std::vector<PhantomSubject> subjects(plan.size());
  parallel_for(plan.size(), [&](std::size_t s) {
    const auto [group, index] = plan[s];
    const std::string id = subject_id(group, index);
    Rng rng(derive_seed(config.seed, id, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    struct Blob {
      double c[3], sigma, amp;
    };
    std::vector<Blob> blobs(config.blob_count);
    for (Blob& b : blobs) {
      for (int a = 0; a < 3; ++a) b.c[a] = box.lo[a] + unit(rng) * (box.hi[a] - box.lo[a] - 1);
      b.sigma = config.blob_sigma_min + unit(rng) * (config.blob_sigma_max - config.blob_sigma_min);
      b.amp = (2.0 * unit(rng) - 1.0) * config.blob_amplitude;
    }
    Volume3D base(dims, 0.0);
    for (int z = 0; z < dims.nz; ++z)
      for (int y = 0; y < dims.ny; ++y)
        for (int x = 0; x < dims.nx; ++x) {
          if (!inside(box, x, y, z)) continue;
          double v = config.base_level;
          for (const Blob& b : blobs) {
            const double dx = x - b.c[0], dy = y - b.c[1], dz = z - b.c[2];
            v += b.amp * std::exp(-(dx * dx + dy * dy + dz * dz) / (2.0 * b.sigma * b.sigma));
          }
          base.at(x, y, z) = std::clamp(v, 0.5, 2.0);
        }

    PhantomSubject& out = subjects[s];
    out.record.id = id;
    out.record.group = group;
    for (int t = 0; t < config.years; ++t) {
      const double offset = phantom_offset(config, group, t);
      Rng noise_rng(derive_seed(config.seed, id, 1, static_cast<std::uint64_t>(t)));
      std::normal_distribution<double> noise(0.0, config.noise_sigma > 0.0 ? config.noise_sigma : 1.0);
      std::vector<double> v(base.values());
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!brain[i]) continue;
        if (roi[i]) v[i] += offset;
        if (config.noise_sigma > 0.0) v[i] += noise(noise_rng);
      }
      out.record.scans.emplace(t, Volume3D(dims, std::move(v)));
    }
    out.base = std::move(base);
  });
  return PhantomCohort{config, std::move(subjects), std::move(atlas), std::move(brain), std::move(reference),
                       std::move(roi)};
}

namespace {

Volume3D mask_to_volume(const MaskVolume& m) {
  std::vector<double> v(m.dims().voxels());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = m[i] ? 1.0 : 0.0;
  return Volume3D(m.dims(), std::move(v));
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

fs::path write_cohort(const PhantomCohort& cohort, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  CohortManifest manifest;
  for (const PhantomSubject& s : cohort.subjects) {
    ManifestEntry e;
    e.id = s.record.id;
    e.group = s.record.group;
    for (const auto& [year, vol] : s.record.scans) {
      fs::path p = dir / "subjects" / s.record.id / ("year_" + std::to_string(year) + ".vol");
      write_volume(vol, p);
      e.scans.emplace(year, p);
    }
    manifest.subjects.push_back(std::move(e));
  }
  write_volume(cohort.atlas, dir / "atlas.vol");
  write_volume(mask_to_volume(cohort.brain), dir / "brain_mask.vol");
  write_volume(mask_to_volume(cohort.reference), dir / "reference_mask.vol");
  write_json(json{{"name", "meta_roi"}, {"labels", cohort.config.roi_labels}}, dir / "roi.json");
  write_json(cohort.config.to_json(), dir / "phantom.json");
  const fs::path manifest_path = dir / "manifest.json";
  save_manifest(manifest, manifest_path);
  return manifest_path;
}

}  // namespace longipet
