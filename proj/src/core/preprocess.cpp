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

#include "longipet/preprocess.hpp"

#include <cmath>

#include "longipet/error.hpp"
#include "longipet/parallel.hpp"
#include "longipet/volume_io.hpp"

namespace longipet {

MaskVolume::MaskVolume(Dims3 dims, std::vector<bool> members, MaskRole role)
    : dims_(dims), members_(std::move(members)), role_(role) {
  check(members_.size() == dims_.voxels(), ErrorKind::kShape, "mask length does not match dims");
  for (bool b : members_) count_ += b ? 1 : 0;
  check(count_ > 0, ErrorKind::kParameter, "mask has no member voxels");
}

MaskVolume MaskVolume::from_volume(const Volume3D& vol, MaskRole role) {
  std::vector<bool> members(vol.size());
  auto data = vol.data();
  for (std::size_t i = 0; i < data.size(); ++i) members[i] = data[i] > 0.5;
  return MaskVolume(vol.dims(), std::move(members), role);
}

Volume3D suvr_normalize(const Volume3D& vol, const MaskVolume& reference) {
  check(vol.dims() == reference.dims(), ErrorKind::kShape,
        "reference mask dims " + to_string(reference.dims()) + " vs volume " +
            to_string(vol.dims()));
  double sum = 0.0;
  auto data = vol.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (reference[i]) sum += data[i];
  }
  double mean = sum / static_cast<double>(reference.count());
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    fail(ErrorKind::kNormalization,
         "reference region mean must be positive, got " + std::to_string(mean));
  }
  Volume3D out = vol;
  for (double& v : out.data()) v /= mean;
  return out;
}

Volume3D apply_brain_mask(const Volume3D& vol, const MaskVolume& brain) {
  check(vol.dims() == brain.dims(), ErrorKind::kShape,
        "brain mask dims " + to_string(brain.dims()) + " vs volume " + to_string(vol.dims()));
  Volume3D out = vol;
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!brain[i]) data[i] = 0.0;
  }
  return out;
}

std::vector<double> gaussian_kernel_1d(double fwhm_voxels) {
  if (!(fwhm_voxels > 0.0) || !std::isfinite(fwhm_voxels)) {
    fail(ErrorKind::kParameter, "FWHM must be positive");
  }
  const double sigma = fwhm_voxels / std::sqrt(8.0 * std::log(2.0));
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    total += taps[i + radius];
  }
  for (double& t : taps) t /= total;
  return taps;
}

namespace {

// Convolves every line along `axis` in place. Each output voxel sums its taps
// in a fixed order, so the result does not depend on the worker schedule.
void smooth_axis(Volume3D& vol, int axis, const std::vector<double>& taps) {
  const Dims3 d = vol.dims();
  const int len = axis == 0 ? d.nx : axis == 1 ? d.ny : d.nz;
  const int radius = static_cast<int>(taps.size() / 2);
  const std::size_t stride = axis == 0 ? 1
                             : axis == 1 ? static_cast<std::size_t>(d.nx)
                                         : static_cast<std::size_t>(d.nx) * d.ny;
  // Enumerate line starts: all voxels with coordinate 0 on `axis`.
  const int a = axis == 0 ? d.ny : d.nx;
  const int b = axis == 2 ? d.ny : d.nz;
  std::span<double> data = vol.data();
  parallel_for(static_cast<std::size_t>(a) * b, [&](std::size_t line) {
    int u = static_cast<int>(line % a);
    int w = static_cast<int>(line / a);
    std::size_t start = axis == 0   ? vol.index(0, u, w)
                        : axis == 1 ? vol.index(u, 0, w)
                                    : vol.index(u, w, 0);
    std::vector<double> in(len), out(len, 0.0);
    for (int i = 0; i < len; ++i) in[i] = data[start + i * stride];
    for (int i = 0; i < len; ++i) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        int j = i + k;
        if (j < 0 || j >= len) continue;
        acc += taps[k + radius] * in[j];
      }
      out[i] = acc;
    }
    for (int i = 0; i < len; ++i) data[start + i * stride] = out[i];
  });
}

}  // namespace

Volume3D gaussian_smooth(const Volume3D& vol, std::array<double, 3> fwhm_voxels) {
  Volume3D out = vol;
  for (int axis = 0; axis < 3; ++axis) smooth_axis(out, axis, gaussian_kernel_1d(fwhm_voxels[axis]));
  return out;
}

Volume3D preprocess_scan(const Volume3D& vol, const MaskVolume& reference,
                         const MaskVolume& brain, const PreprocessOptions& options) {
  Volume3D out = suvr_normalize(vol, reference);
  if (options.order == PipelineOrder::kSuvrMaskSmooth) {
    out = gaussian_smooth(apply_brain_mask(out, brain), options.fwhm_voxels);
  } else {
    out = apply_brain_mask(gaussian_smooth(out, options.fwhm_voxels), brain);
  }
  return options.pad ? pad_to_even(out) : out;
}

}  // namespace longipet
