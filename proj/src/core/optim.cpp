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

#include "longipet/optim.hpp"

#include <algorithm>
#include <cmath>

#include "longipet/error.hpp"

namespace longipet::ad {

Tensor& ParameterSet::at(const std::string& name) {
  auto it = learnable.find(name);
  if (it == learnable.end()) fail(ErrorKind::kContract, "no parameter named " + name);
  return it->second;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = learnable.find(name);
  if (it == learnable.end()) fail(ErrorKind::kContract, "no parameter named " + name);
  return it->second;
}

void ParameterSet::zero_grad() {
  for (auto& [name, t] : learnable) t.zero_grad();
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : learnable) n += t.size();
  return n;
}

ParameterSet ParameterSet::clone() const {
  ParameterSet out;
  for (const auto& [name, t] : learnable) {
    auto v = t.values();
    out.learnable.emplace(name, Tensor::from(t.shape(), std::vector<double>(v.begin(), v.end()), true));
  }
  out.running = running;
  return out;
}

void ParameterSet::round_to_float32() {
  auto round = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  for (auto& [name, t] : learnable) {
    for (double& v : t.mutable_values()) v = round(v);
  }
  for (auto& [name, s] : running) {
    for (double& v : s.mean) v = round(v);
    for (double& v : s.var) v = round(v);
  }
}

bool ParameterSet::equals(const ParameterSet& other) const {
  if (learnable.size() != other.learnable.size() || running.size() != other.running.size()) return false;
  for (const auto& [name, t] : learnable) {
    auto it = other.learnable.find(name);
    if (it == other.learnable.end() || it->second.shape() != t.shape()) return false;
    auto a = t.values();
    auto b = it->second.values();
    if (!std::equal(a.begin(), a.end(), b.begin())) return false;
  }
  for (const auto& [name, s] : running) {
    auto it = other.running.find(name);
    if (it == other.running.end()) return false;
    if (s.initialized != it->second.initialized || s.mean != it->second.mean || s.var != it->second.var) {
      return false;
    }
  }
  return true;
}

void adam_step(ParameterSet& params, AdamState& state, const AdamOptions& options) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  for (auto& [name, tensor] : params.learnable) {
    auto values = tensor.mutable_values();
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) {
      m.assign(values.size(), 0.0);
      v.assign(values.size(), 0.0);
    }
    const bool has_grad = tensor.has_grad();
    auto grad = tensor.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = has_grad ? grad[i] : 0.0;
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g;
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

}  // namespace longipet::ad
