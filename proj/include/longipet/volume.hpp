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

#ifndef LONGIPET_VOLUME_HPP_
#define LONGIPET_VOLUME_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace longipet {

struct Dims3 {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t voxels() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  bool positive() const { return nx > 0 && ny > 0 && nz > 0; }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

std::string to_string(const Dims3& dims);

// Voxel-to-world transform in millimetres, row-major.
using Affine4 = std::array<std::array<double, 4>, 4>;

Affine4 identity_affine();

// Dense scalar field of SUVR values stored x-fastest. Values are float64 in
// memory; the on-disk formats hold float32.
class Volume3D {
 public:
  Volume3D() = default;
  explicit Volume3D(Dims3 dims, double fill = 0.0, Affine4 affine = identity_affine());
  Volume3D(Dims3 dims, std::vector<double> data, Affine4 affine = identity_affine());

  const Dims3& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  const Affine4& affine() const { return affine_; }
  void set_affine(const Affine4& affine) { affine_ = affine; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims_.nx) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims_.ny) *
                                                  static_cast<std::size_t>(z));
  }
  double& at(int x, int y, int z) { return data_[index(x, y, z)]; }
  double at(int x, int y, int z) const { return data_[index(x, y, z)]; }
  bool contains(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims_.nx && y < dims_.ny && z < dims_.nz;
  }

  double sum() const;
  double min() const;
  double max() const;
  bool all_finite() const;

 private:
  Dims3 dims_;
  std::vector<double> data_;
  Affine4 affine_ = identity_affine();
};

// Throws a shape error naming `what` when the two grids differ.
void require_same_dims(const Volume3D& a, const Volume3D& b, const char* what);

}  // namespace longipet

#endif  // LONGIPET_VOLUME_HPP_
