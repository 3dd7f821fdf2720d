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

#ifndef LONGIPET_TENSOR_HPP_
#define LONGIPET_TENSOR_HPP_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace longipet::ad {

using Shape = std::vector<int>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

struct Node;

// Handle onto a node of the reverse-mode graph. Copies share the node, so a
// Tensor behaves like a reference to its value and gradient. Dense float64,
// row-major; spatial tensors are laid out [N, D, H, W, C].
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int dim(int axis) const;
  std::size_t size() const;

  std::span<const double> values() const;
  // Writing through this view after the tensor has been consumed by an op
  // silently invalidates that op's backward pass.
  std::span<double> mutable_values();

  bool requires_grad() const;
  bool has_grad() const;
  // Empty span until a backward pass reached this tensor.
  std::span<const double> grad() const;
  void zero_grad();

  const char* op_name() const;

  // Reverse pass from a scalar. Non-leaf gradients are recomputed on every
  // call while leaf gradients accumulate, so two calls add.
  void backward() const;

  // Internal: used by operator implementations.
  static Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                            std::vector<Tensor> parents,
                            std::function<void(Node&)> backward_fn);
  Node& node() const { return *node_; }

 private:
  std::shared_ptr<Node> node_;
};

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backward_fn;

  bool is_leaf() const { return parents.empty(); }
  // Allocates the gradient buffer on first use.
  std::vector<double>& grad_buffer();
};

}  // namespace longipet::ad

#endif  // LONGIPET_TENSOR_HPP_
