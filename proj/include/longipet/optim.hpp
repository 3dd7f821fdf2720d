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

#ifndef LONGIPET_OPTIM_HPP_
#define LONGIPET_OPTIM_HPP_

#include <map>
#include <string>
#include <vector>

#include "longipet/ops.hpp"
#include "longipet/tensor.hpp"

namespace longipet::ad {

// Named learnable tensors plus batch-norm running statistics. Names are map
// keys, so iteration order (and therefore serialization) is deterministic.
struct ParameterSet {
  std::map<std::string, Tensor> learnable;
  std::map<std::string, BatchNormStats> running;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  void zero_grad();
  std::size_t parameter_count() const;

  // Value copy: fresh leaf tensors, no shared nodes.
  ParameterSet clone() const;
  // Rounds every value and running statistic to float32 precision.
  void round_to_float32();
  bool equals(const ParameterSet& other) const;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
};

struct AdamState {
  long step = 0;
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
};

// theta -= lr * m_hat / (sqrt(v_hat) + eps), with bias-corrected moments.
// Parameters without a gradient are treated as having a zero gradient.
void adam_step(ParameterSet& params, AdamState& state, const AdamOptions& options = {});

}  // namespace longipet::ad

#endif  // LONGIPET_OPTIM_HPP_
