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

#ifndef LONGIPET_OPS_HPP_
#define LONGIPET_OPS_HPP_

#include <utility>
#include <vector>

#include "longipet/tensor.hpp"

namespace longipet::ad {

// All spatial operators take channels-last [N, D, H, W, C] tensors.

// Cross-correlation, stride 1, "same" zero padding (odd k).
// kernel [k, k, k, Cin, Cout], bias [Cout].
Tensor conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias);

// Adjoint of conv3d at stride 1 with same padding: with the same kernel array
// this equals conv3d's input gradient. kernel [k, k, k, Cout, Cin], bias [Cout].
Tensor conv_transpose3d(const Tensor& input, const Tensor& kernel, const Tensor& bias);

// Non-overlapping 2x2x2 max. Ties route the gradient to the first voxel in
// x-fastest order within the cell.
Tensor maxpool3d(const Tensor& input);

// Nearest-neighbour x2 replication along D, H, W.
Tensor upsample_nn(const Tensor& input);

enum class Mode { kTrain, kInfer };

struct BatchNormStats {
  std::vector<double> mean;
  std::vector<double> var;
  bool initialized = false;
};

struct BatchNormOptions {
  double eps = 1e-3;
  double momentum = 0.99;
};

// Per-channel normalization over batch and spatial axes. Train mode uses the
// biased batch variance and updates `stats` (the first update copies the batch
// statistics, later ones blend with `momentum`). Infer mode reads `stats` and
// fails with a state error before any train-mode update.
Tensor batchnorm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                 BatchNormStats& stats, Mode mode, const BatchNormOptions& options = {});

Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// Channel (last axis) concatenation and slicing.
Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor slice_channels(const Tensor& x, int start, int count);

Tensor sum(const Tensor& x);

// mean |pred - target|; subgradient 0 where they are equal.
Tensor mae_loss(const Tensor& pred, const Tensor& target);

struct LstmState {
  Tensor h;
  Tensor c;
};

// One convolutional LSTM step. kernel [k,k,k, Cx+F, 4F] acts on the channel
// concatenation (x_t, h_prev); gate order along the output channels is
// input, forget, candidate, output. i, f, o are logistic; candidate and the
// cell output use tanh.
LstmState convlstm3d_step(const Tensor& x, const LstmState& prev, const Tensor& kernel,
                          const Tensor& bias);

}  // namespace longipet::ad

#endif  // LONGIPET_OPS_HPP_
