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

#ifndef LONGIPET_I2I_MODEL_HPP_
#define LONGIPET_I2I_MODEL_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "longipet/ops.hpp"
#include "longipet/optim.hpp"
#include "longipet/volume.hpp"

namespace longipet {

// Image-to-image forecaster: a 2-frame convolutional LSTM encoder followed by
//   maxpool(2) -> batchnorm -> conv_transpose(3x3x3, relu) -> upsample(2)
//   -> conv(1x1x1, relu)
// mapping (baseline, year one) to the year-two volume.
struct I2IModelConfig {
  Dims3 dims{80, 96, 80};
  int lstm_filters = 16;
  int decoder_filters = 32;
  int kernel = 3;
  int pool = 2;
  int output_channels = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static I2IModelConfig from_json(const nlohmann::json& j);
};

struct I2IModel {
  I2IModelConfig config;
  ad::ParameterSet params;
};

// Parameter names.
inline constexpr const char* kLstmKernel = "convlstm/kernel";
inline constexpr const char* kLstmBias = "convlstm/bias";
inline constexpr const char* kBnGamma = "batchnorm/gamma";
inline constexpr const char* kBnBeta = "batchnorm/beta";
inline constexpr const char* kBnStats = "batchnorm";
inline constexpr const char* kDeconvKernel = "deconv/kernel";
inline constexpr const char* kDeconvBias = "deconv/bias";
inline constexpr const char* kOutputKernel = "output/kernel";
inline constexpr const char* kOutputBias = "output/bias";

// Glorot-uniform kernels (limit sqrt(6 / (fan_in + fan_out)) with fans
// receptive * in/out channels), zero biases, gamma 1, beta 0, no running
// statistics yet. Values are rounded to float32. Deterministic per seed.
ad::ParameterSet init_model(const I2IModelConfig& config, std::uint64_t seed);

double glorot_limit(const ad::Shape& kernel_shape);

// Intermediate shapes of one forward pass, each [N, D, H, W, C].
struct ForwardTrace {
  ad::Shape input;
  ad::Shape lstm_hidden;
  ad::Shape pooled;
  ad::Shape normalized;
  ad::Shape decoded;
  ad::Shape upsampled;
  ad::Shape output;
};

// Batched forward on [N, nz, ny, nx, 1] tensors. Train mode updates the
// batch-norm running statistics held in `params`.
ad::Tensor forward_batch(ad::ParameterSet& params, const I2IModelConfig& config,
                         const ad::Tensor& baseline, const ad::Tensor& year1, ad::Mode mode,
                         ForwardTrace* trace = nullptr);

// Inference on one pair of volumes. Builds no backward graph and does not
// touch the model.
Volume3D predict(const I2IModel& model, const Volume3D& baseline, const Volume3D& year1,
                 ForwardTrace* trace = nullptr);

// Stacks volumes along the batch axis as [N, nz, ny, nx, 1].
ad::Tensor volumes_to_tensor(const std::vector<const Volume3D*>& volumes, bool requires_grad = false);
Volume3D tensor_to_volume(const ad::Tensor& t, int batch_index, const Affine4& affine = identity_affine());

// (X, Y, Z, C) reading of a [N, D, H, W, C] shape.
std::array<int, 4> xyzc(const ad::Shape& shape);

void save_model(const I2IModel& model, const std::filesystem::path& path,
                const nlohmann::json& extra_metadata = nlohmann::json::object());
I2IModel load_model(const std::filesystem::path& path);

}  // namespace longipet

#endif  // LONGIPET_I2I_MODEL_HPP_
