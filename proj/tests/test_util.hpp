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

// Shared fixtures for the unit tests: seeded random volumes and scratch
// directories.

#ifndef LONGIPET_TESTS_TEST_UTIL_HPP_
#define LONGIPET_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "longipet/parallel.hpp"
#include "longipet/volume.hpp"

namespace longipet::testing {

inline Volume3D random_volume(Dims3 dims, std::uint64_t seed, double lo = 0.0, double hi = 2.0) {
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(dims.voxels());
  for (double& x : v) x = dist(rng);
  return Volume3D(dims, std::move(v));
}

inline Volume3D constant_volume(Dims3 dims, double value) { return Volume3D(dims, value); }

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("longipet_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace longipet::testing

#endif  // LONGIPET_TESTS_TEST_UTIL_HPP_
