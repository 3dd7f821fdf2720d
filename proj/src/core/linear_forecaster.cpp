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

#include "longipet/linear_forecaster.hpp"

#include <algorithm>

namespace longipet {

Volume3D predict_linear(const Volume3D& prev2, const Volume3D& prev1, const LinearOptions& options) {
  require_same_dims(prev2, prev1, "predict_linear");
  const auto& a = prev2.values();
  const auto& b = prev1.values();
  std::vector<double> out(b.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 2.0 * b[i] - a[i];
    if (options.clamp_nonnegative) out[i] = std::max(out[i], 0.0);
  }
  return Volume3D(prev1.dims(), std::move(out), prev1.affine());
}

}  // namespace longipet
