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
#include <fstream>

#include "doctest.h"
#include "longipet/error.hpp"
#include "longipet/forecaster.hpp"
#include "longipet/linear_forecaster.hpp"
#include "longipet/metrics.hpp"
#include "longipet/phantom.hpp"
#include "longipet/volume_io.hpp"
#include "test_util.hpp"

using namespace longipet;
using longipet::testing::ScratchDir;

namespace {

PhantomConfig noise_free() {
  PhantomConfig c;
  c.noise_sigma = 0.0;
  c.cn = 2;
  c.mci = 2;
  c.dementia = 2;
  return c;
}

double roi_mean_error(const Volume3D& pred, const Volume3D& truth, const MaskVolume& roi) {
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (roi[i]) s += pred.values()[i] - truth.values()[i];
  return s / static_cast<double>(roi.count());
}

}  // namespace

TEST_CASE("cohort layout") {
  PhantomConfig c;
  c.cn = 3;
  c.mci = 5;
  c.dementia = 2;
  PhantomCohort p = generate_cohort(c);
  REQUIRE(p.subjects.size() == 10);
  int counts[3] = {0, 0, 0};
  for (const auto& s : p.subjects) {
    ++counts[static_cast<int>(s.record.group)];
    CHECK(s.record.scans.size() == static_cast<std::size_t>(c.years));
    CHECK(s.base.min() >= 0.0);
    CHECK(s.base.max() <= 2.0);
  }
  CHECK(counts[0] == 3);
  CHECK(counts[1] == 5);
  CHECK(counts[2] == 2);
  CHECK(atlas_labels(p.atlas) == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(p.reference.count() == 27);
  for (std::size_t i = 0; i < p.roi.dims().voxels(); ++i) {
    if (p.roi[i]) CHECK(p.brain[i]);
    if (p.reference[i]) CHECK(!p.roi[i]);
  }
}

TEST_CASE("deterministic per seed") {
  PhantomConfig c;
  c.cn = 2;
  c.mci = 2;
  c.dementia = 1;
  PhantomCohort a = generate_cohort(c), b = generate_cohort(c);
  for (std::size_t s = 0; s < a.subjects.size(); ++s)
    for (const auto& [t, v] : a.subjects[s].record.scans) CHECK(v.values() == b.subjects[s].record.scan(t).values());
  c.seed = 8;
  CHECK(generate_cohort(c).subjects[0].record.scan(0).values() != a.subjects[0].record.scan(0).values());
}

TEST_CASE("noise-free trajectories against the linear forecaster") {
  PhantomConfig c = noise_free();
  PhantomCohort p = generate_cohort(c);
  StepFn step = [](const Volume3D& a, const Volume3D& b) { return predict_linear(a, b); };
  for (const auto& s : p.subjects) {
    const auto& r = s.record;
    auto forecast = forecast_recursive(step, r.scan(0), r.scan(1), c.years - 1);
    for (const auto& [k, v] : forecast) {
      if (r.group == Group::kMCI) {
        // Closed form: linear recursion offset -k*gamma against truth -k^2*gamma.
        CHECK(std::abs(roi_mean_error(v, r.scan(k), p.roi) - k * (k - 1) * c.gamma) < 1e-9);
      } else {
        CHECK(mae(v, r.scan(k)) < 1e-10);
      }
    }
    if (r.group == Group::kMCI) {
      Volume3D y2 = predict_linear(r.scan(0), r.scan(1));
      MaskVolume roi = p.roi;
      CHECK(std::abs(mae(y2, r.scan(2), &roi) - 2.0 * c.gamma) < 1e-12);
    }
  }
}

TEST_CASE("offsets") {
  PhantomConfig c;
  CHECK(phantom_offset(c, Group::kCN, 5) == 0.0);
  CHECK(phantom_offset(c, Group::kDementia, 3) == doctest::Approx(-3 * c.beta));
  CHECK(phantom_offset(c, Group::kMCI, 3) == doctest::Approx(-9 * c.gamma));
}

TEST_CASE("config validation") {
  PhantomConfig c;
  c.dims = {15, 16, 16};
  CHECK_THROWS_AS(c.validate(), Error);
  c = PhantomConfig{};
  c.noise_sigma = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PhantomConfig{};
  c.mci = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PhantomConfig{};
  CHECK(PhantomConfig::from_json(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("written cohort reloads through the manifest") {
  ScratchDir dir("phantom");
  PhantomConfig c;
  c.cn = 1;
  c.mci = 1;
  c.dementia = 1;
  c.years = 3;
  PhantomCohort p = generate_cohort(c);
  auto manifest_path = write_cohort(p, dir.path());
  CohortManifest m = load_manifest(manifest_path);
  REQUIRE(m.subjects.size() == 3);
  for (const auto& s : p.subjects) {
    SubjectRecord back = load_subject(*m.find(s.record.id));
    for (int t = 0; t < 3; ++t) {
      const auto& orig = s.record.scan(t).values();
      const auto& read = back.scan(t).values();
      for (std::size_t i = 0; i < orig.size(); ++i) CHECK(read[i] == static_cast<double>(static_cast<float>(orig[i])));
    }
  }
  CHECK(read_volume(dir / "atlas.vol").values() == p.atlas.values());
  RoiDefinition roi = RoiDefinition::load(dir / "roi.json");
  CHECK(roi.labels == c.roi_labels);
  CHECK(std::filesystem::exists(dir / "brain_mask.vol"));
  CHECK(std::filesystem::exists(dir / "reference_mask.vol"));
  CHECK(std::filesystem::exists(dir / "phantom.json"));
}
