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

#include "longipet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "longipet/error.hpp"
#include "longipet/parallel.hpp"

namespace longipet {

double mae(const Volume3D& a, const Volume3D& b, const MaskVolume* mask) {
  require_same_dims(a, b, "mae");
  const auto& x = a.values();
  const auto& y = b.values();
  double total = 0.0;
  std::size_t n = 0;
  if (mask) {
    check(mask->dims() == a.dims(), ErrorKind::kShape, "mae mask dims differ from the volumes");
    check(mask->count() > 0, ErrorKind::kParameter, "mae mask is empty");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(*mask)[i]) continue;
      total += std::abs(x[i] - y[i]);
      ++n;
    }
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) total += std::abs(x[i] - y[i]);
    n = x.size();
  }
  return total / static_cast<double>(n);
}

namespace {

// Valid-mode separable filtering of a field along one axis.
struct Field {
  int nx, ny, nz;
  std::vector<double> v;
  double at(int x, int y, int z) const {
    return v[static_cast<std::size_t>(x) + static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z)];
  }
};

Field filter_axis(const Field& in, const std::vector<double>& taps, int axis) {
  const int w = static_cast<int>(taps.size());
  Field out{in.nx - (axis == 0 ? w - 1 : 0), in.ny - (axis == 1 ? w - 1 : 0), in.nz - (axis == 2 ? w - 1 : 0), {}};
  out.v.assign(static_cast<std::size_t>(out.nx) * out.ny * out.nz, 0.0);
  std::size_t i = 0;
  for (int z = 0; z < out.nz; ++z)
    for (int y = 0; y < out.ny; ++y)
      for (int x = 0; x < out.nx; ++x) {
        double s = 0.0;
        for (int t = 0; t < w; ++t) {
          s += taps[t] * in.at(x + (axis == 0 ? t : 0), y + (axis == 1 ? t : 0), z + (axis == 2 ? t : 0));
        }
        out.v[i++] = s;
      }
  return out;
}

Field local_mean(Field f, const std::vector<double>& taps) {
  for (int axis = 0; axis < 3; ++axis) f = filter_axis(f, taps, axis);
  return f;
}

}  // namespace

double ssim3d(const Volume3D& a, const Volume3D& b, const SsimOptions& options) {
  require_same_dims(a, b, "ssim3d");
  const Dims3 d = a.dims();
  const int w = options.window;
  check(w >= 1 && w % 2 == 1 && options.sigma > 0.0, ErrorKind::kParameter, "SSIM window must be odd and sigma > 0");
  check(d.nx >= w && d.ny >= w && d.nz >= w, ErrorKind::kShape,
        "volume " + to_string(d) + " is smaller than the " + std::to_string(w) + "^3 SSIM window");

  const double range = options.dynamic_range
                           ? *options.dynamic_range
                           : std::max(a.max(), b.max()) - std::min(a.min(), b.min());
  if (!(range > 0.0)) {
    if (a.values() == b.values()) return 1.0;
    fail(ErrorKind::kParameter, "SSIM dynamic range is zero for unequal volumes");
  }

  std::vector<double> taps(w);
  const int r = w / 2;
  double norm = 0.0;
  for (int i = 0; i < w; ++i) {
    taps[i] = std::exp(-static_cast<double>((i - r) * (i - r)) / (2.0 * options.sigma * options.sigma));
    norm += taps[i];
  }
  for (double& t : taps) t /= norm;

  const auto& x = a.values();
  const auto& y = b.values();
  std::vector<Field> fields(5, Field{d.nx, d.ny, d.nz, std::vector<double>(x.size())});
  for (std::size_t i = 0; i < x.size(); ++i) {
    fields[0].v[i] = x[i];
    fields[1].v[i] = y[i];
    fields[2].v[i] = x[i] * x[i];
    fields[3].v[i] = y[i] * y[i];
    fields[4].v[i] = x[i] * y[i];
  }
  std::vector<Field> means(5);
  parallel_for(5, [&](std::size_t k) { means[k] = local_mean(std::move(fields[k]), taps); });

  const double c1 = (options.k1 * range) * (options.k1 * range);
  const double c2 = (options.k2 * range) * (options.k2 * range);
  double total = 0.0;
  const std::size_t n = means[0].v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double mu_a = means[0].v[i];
    const double mu_b = means[1].v[i];
    const double var_a = means[2].v[i] - mu_a * mu_a;
    const double var_b = means[3].v[i] - mu_b * mu_b;
    const double cov = means[4].v[i] - mu_a * mu_b;
    total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
             ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
  }
  return total / static_cast<double>(n);
}

std::map<int, double> regional_mae(const Volume3D& a, const Volume3D& b, const Volume3D& atlas) {
  require_same_dims(a, b, "regional_mae");
  require_same_dims(a, atlas, "regional_mae atlas");
  std::map<int, std::pair<double, std::size_t>> acc;
  const auto& x = a.values();
  const auto& y = b.values();
  const auto& l = atlas.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int label = static_cast<int>(std::lround(l[i]));
    if (label <= 0) continue;
    auto& [sum, n] = acc[label];
    sum += std::abs(x[i] - y[i]);
    ++n;
  }
  std::map<int, double> out;
  for (const auto& [label, s] : acc) out[label] = s.first / static_cast<double>(s.second);
  return out;
}

RoiDefinition RoiDefinition::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open ROI config " + path.string());
  RoiDefinition roi;
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    roi.name = j.value("name", roi.name);
    roi.labels = j.at("labels").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, "ROI config " + path.string() + ": " + e.what());
  }
  check(!roi.labels.empty(), ErrorKind::kParameter, "ROI config lists no labels");
  return roi;
}

double meta_roi_suvr(const Volume3D& vol, const Volume3D& atlas, const RoiDefinition& roi) {
  require_same_dims(vol, atlas, "meta_roi_suvr atlas");
  const std::set<int> labels(roi.labels.begin(), roi.labels.end());
  const auto& v = vol.values();
  const auto& l = atlas.values();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!labels.count(static_cast<int>(std::lround(l[i])))) continue;
    sum += v[i];
    ++n;
  }
  if (n == 0) fail(ErrorKind::kParameter, "ROI " + roi.name + " has no voxels in the atlas");
  return sum / static_cast<double>(n);
}

std::vector<int> atlas_labels(const Volume3D& atlas) {
  std::set<int> labels;
  for (double v : atlas.values()) {
    const int l = static_cast<int>(std::lround(v));
    if (l > 0) labels.insert(l);
  }
  return {labels.begin(), labels.end()};
}

}  // namespace longipet
