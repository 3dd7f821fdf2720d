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

#ifndef LONGIPET_LINEAR_FORECASTER_HPP_
#define LONGIPET_LINEAR_FORECASTER_HPP_

#include "longipet/volume.hpp"

namespace longipet {

struct LinearOptions {
  // SUVR is nonnegative; off by default so the extrapolation stays exact.
  bool clamp_nonnegative = false;
};

// Voxelwise extrapolation from the two previous years:
//   next = prev1 - (prev2 - prev1) = 2 * prev1 - prev2
Volume3D predict_linear(const Volume3D& prev2, const Volume3D& prev1, const LinearOptions& options = {});

}  // namespace longipet

#endif  // LONGIPET_LINEAR_FORECASTER_HPP_
