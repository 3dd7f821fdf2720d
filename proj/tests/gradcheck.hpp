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

// Central finite-difference gradient checker shared by the autodiff tests and
// the acceptance gate.

#ifndef LONGIPET_TESTS_GRADCHECK_HPP_
#define LONGIPET_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "longipet/ops.hpp"
#include "longipet/parallel.hpp"

namespace longipet::testing {

using ad::Shape;
using ad::Tensor;

// Scalar objective over a list of leaf tensors.
using Objective = std::function<Tensor(const std::vector<Tensor>&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;  // worst over inputs
  std::size_t checked = 0;     // number of perturbed entries
};

// Per input, error = max_i |analytic_i - numeric_i| / max(max_i |numeric_i|, 1e-8).
// Normalizing by the tensor's largest gradient keeps near-zero entries from
// dominating through finite-difference roundoff.
inline GradCheckResult grad_check(const Objective& f, std::vector<Tensor> inputs, double h = 1e-5) {
  for (Tensor& t : inputs) t.zero_grad();
  Tensor loss = f(inputs);
  loss.backward();
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : inputs) {
    auto g = t.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(t.size(), 0.0);
  }
  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_values();
    double max_diff = 0.0, max_num = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = f(inputs).values()[0];
      values[i] = saved - h;
      const double down = f(inputs).values()[0];
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      max_diff = std::max(max_diff, std::abs(numeric - analytic[k][i]));
      max_num = std::max(max_num, std::abs(numeric));
      ++result.checked;
    }
    result.max_rel_error = std::max(result.max_rel_error, max_diff / std::max(max_num, 1e-8));
  }
  return result;
}

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0, bool grad = true) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(ad::shape_size(shape));
  for (double& x : v) x = dist(rng);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

// Values bounded away from zero, so relu/abs kinks stay farther than h away.
inline Tensor random_nonzero_tensor(Shape shape, Rng& rng, double margin = 0.05, bool grad = true) {
  std::uniform_real_distribution<double> dist(margin, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(ad::shape_size(shape));
  for (double& x : v) x = sign(rng) ? dist(rng) : -dist(rng);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

// Distinct values with gaps well above h: a shuffled ramp.
inline Tensor distinct_tensor(Shape shape, Rng& rng, bool grad = true) {
  std::vector<double> v(ad::shape_size(shape));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.01 * static_cast<double>(i) - 0.3;
  std::shuffle(v.begin(), v.end(), rng);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

// Fixed random projection turning a tensor output into a scalar with a
// nontrivial upstream gradient.
inline Tensor project(const Tensor& out, const Tensor& weights) { return ad::sum(ad::mul(out, weights)); }

}  // namespace longipet::testing

#endif  // LONGIPET_TESTS_GRADCHECK_HPP_
