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

#include "longipet/i2i_model.hpp"

#include <cmath>
#include <random>

#include "longipet/error.hpp"
#include "longipet/parallel.hpp"
#include "longipet/param_io.hpp"

namespace longipet {

using ad::Mode;
using ad::ParameterSet;
using ad::Shape;
using ad::Tensor;
using nlohmann::json;

void I2IModelConfig::validate() const {
  check(dims.positive(), ErrorKind::kParameter, "model dims must be positive");
  check(pool == 2, ErrorKind::kParameter, "only 2x2x2 pooling is supported");
  check(dims.nx % pool == 0 && dims.ny % pool == 0 && dims.nz % pool == 0, ErrorKind::kParameter,
        "model dims " + to_string(dims) + " must be divisible by the pool size");
  check(lstm_filters > 0 && decoder_filters > 0, ErrorKind::kParameter, "filter counts must be positive");
  check(kernel > 0 && kernel % 2 == 1, ErrorKind::kParameter, "kernel size must be odd");
  check(output_channels == 1, ErrorKind::kParameter, "the model predicts a single output channel");
}

json I2IModelConfig::to_json() const {
  return json{{"dims", {dims.nx, dims.ny, dims.nz}},
              {"lstm_filters", lstm_filters},
              {"decoder_filters", decoder_filters},
              {"kernel", kernel},
              {"pool", pool},
              {"output_channels", output_channels},
              {"activations", {{"lstm", "tanh"}, {"lstm_gates", "sigmoid"}, {"deconv", "relu"}, {"output", "relu"}}}};
}

I2IModelConfig I2IModelConfig::from_json(const json& j) {
  I2IModelConfig c;
  try {
    if (j.contains("dims")) {
      auto d = j.at("dims").get<std::vector<int>>();
      check(d.size() == 3, ErrorKind::kParameter, "config dims must have 3 entries");
      c.dims = {d[0], d[1], d[2]};
    }
    c.lstm_filters = j.value("lstm_filters", c.lstm_filters);
    c.decoder_filters = j.value("decoder_filters", c.decoder_filters);
    c.kernel = j.value("kernel", c.kernel);
    c.pool = j.value("pool", c.pool);
    c.output_channels = j.value("output_channels", c.output_channels);
  } catch (const json::exception& e) {
    fail(ErrorKind::kParameter, std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

double glorot_limit(const Shape& kernel_shape) {
  check(kernel_shape.size() == 5, ErrorKind::kShape, "glorot_limit expects a 5D kernel");
  const double receptive = static_cast<double>(kernel_shape[0]) * kernel_shape[1] * kernel_shape[2];
  const double fan_in = receptive * kernel_shape[3];
  const double fan_out = receptive * kernel_shape[4];
  return std::sqrt(6.0 / (fan_in + fan_out));
}

ParameterSet init_model(const I2IModelConfig& config, std::uint64_t seed) {
  config.validate();
  const int k = config.kernel;
  const int f = config.lstm_filters;
  const int dec = config.decoder_filters;
  Rng rng(seed);
  auto glorot = [&](Shape shape) {
    const double limit = glorot_limit(shape);
    std::uniform_real_distribution<double> dist(-limit, limit);
    std::vector<double> values(ad::shape_size(shape));
    for (double& v : values) v = static_cast<float>(dist(rng));
    return Tensor::from(std::move(shape), std::move(values), true);
  };
  ParameterSet p;
  // Fixed draw order keeps initialization independent of map ordering.
  p.learnable.emplace(kLstmKernel, glorot({k, k, k, 1 + f, 4 * f}));
  p.learnable.emplace(kDeconvKernel, glorot({k, k, k, dec, f}));
  p.learnable.emplace(kOutputKernel, glorot({1, 1, 1, dec, config.output_channels}));
  p.learnable.emplace(kLstmBias, Tensor::zeros({4 * f}, true));
  p.learnable.emplace(kBnGamma, Tensor::full({f}, 1.0, true));
  p.learnable.emplace(kBnBeta, Tensor::zeros({f}, true));
  p.learnable.emplace(kDeconvBias, Tensor::zeros({dec}, true));
  p.learnable.emplace(kOutputBias, Tensor::zeros({config.output_channels}, true));
  p.running.emplace(kBnStats, ad::BatchNormStats{});
  return p;
}

namespace {

struct Weights {
  Tensor lstm_kernel, lstm_bias, gamma, beta, deconv_kernel, deconv_bias, out_kernel, out_bias;
};

Weights weights_of(const ParameterSet& p, bool detach) {
  auto get = [&](const char* name) {
    const Tensor& t = p.at(name);
    if (!detach) return t;
    auto v = t.values();
    return Tensor::from(t.shape(), std::vector<double>(v.begin(), v.end()), false);
  };
  return {get(kLstmKernel), get(kLstmBias),     get(kBnGamma),      get(kBnBeta),
          get(kDeconvKernel), get(kDeconvBias), get(kOutputKernel), get(kOutputBias)};
}

void check_input(const I2IModelConfig& config, const Tensor& t, const char* what) {
  const Shape& s = t.shape();
  const Dims3& d = config.dims;
  if (s.size() != 5 || s[1] != d.nz || s[2] != d.ny || s[3] != d.nx || s[4] != 1) {
    fail(ErrorKind::kShape, std::string(what) + " shape " + ad::shape_string(s) +
                                " does not match model dims " + to_string(d));
  }
}

Tensor run(const Weights& w, ad::BatchNormStats& stats, const I2IModelConfig& config,
           const Tensor& baseline, const Tensor& year1, Mode mode, ForwardTrace* trace) {
  config.validate();
  check_input(config, baseline, "baseline");
  check_input(config, year1, "year-one");
  check(baseline.shape() == year1.shape(), ErrorKind::kShape, "baseline and year-one batches differ");

  ad::LstmState state;
  state = ad::convlstm3d_step(baseline, state, w.lstm_kernel, w.lstm_bias);
  state = ad::convlstm3d_step(year1, state, w.lstm_kernel, w.lstm_bias);
  Tensor pooled = ad::maxpool3d(state.h);
  Tensor normalized = ad::batchnorm(pooled, w.gamma, w.beta, stats, mode);
  Tensor decoded = ad::relu(ad::conv_transpose3d(normalized, w.deconv_kernel, w.deconv_bias));
  Tensor upsampled = ad::upsample_nn(decoded);
  Tensor output = ad::relu(ad::conv3d(upsampled, w.out_kernel, w.out_bias));
  if (trace) {
    *trace = {baseline.shape(), state.h.shape(),   pooled.shape(), normalized.shape(),
              decoded.shape(),  upsampled.shape(), output.shape()};
  }
  return output;
}

}  // namespace

Tensor forward_batch(ParameterSet& params, const I2IModelConfig& config, const Tensor& baseline,
                     const Tensor& year1, Mode mode, ForwardTrace* trace) {
  auto it = params.running.find(kBnStats);
  if (it == params.running.end()) fail(ErrorKind::kContract, "parameter set lacks batch-norm statistics");
  return run(weights_of(params, false), it->second, config, baseline, year1, mode, trace);
}

Volume3D predict(const I2IModel& model, const Volume3D& baseline, const Volume3D& year1,
                 ForwardTrace* trace) {
  require_same_dims(baseline, year1, "i2i inputs");
  auto it = model.params.running.find(kBnStats);
  if (it == model.params.running.end()) fail(ErrorKind::kContract, "parameter set lacks batch-norm statistics");
  ad::BatchNormStats stats = it->second;
  Tensor out = run(weights_of(model.params, true), stats, model.config, volumes_to_tensor({&baseline}),
                   volumes_to_tensor({&year1}), Mode::kInfer, trace);
  return tensor_to_volume(out, 0, year1.affine());
}

Tensor volumes_to_tensor(const std::vector<const Volume3D*>& volumes, bool requires_grad) {
  check(!volumes.empty(), ErrorKind::kShape, "empty batch");
  const Dims3 d = volumes.front()->dims();
  std::vector<double> values;
  values.reserve(d.voxels() * volumes.size());
  for (const Volume3D* v : volumes) {
    check(v->dims() == d, ErrorKind::kShape, "batch volumes differ in dims");
    values.insert(values.end(), v->values().begin(), v->values().end());
  }
  return Tensor::from({static_cast<int>(volumes.size()), d.nz, d.ny, d.nx, 1}, std::move(values), requires_grad);
}

Volume3D tensor_to_volume(const Tensor& t, int batch_index, const Affine4& affine) {
  const Shape& s = t.shape();
  check(s.size() == 5 && s[4] == 1, ErrorKind::kShape, "expected a [N,D,H,W,1] tensor");
  check(batch_index >= 0 && batch_index < s[0], ErrorKind::kShape, "batch index out of range");
  const Dims3 d{s[3], s[2], s[1]};
  auto v = t.values();
  auto begin = v.begin() + static_cast<std::ptrdiff_t>(d.voxels() * batch_index);
  return Volume3D(d, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(d.voxels())), affine);
}

std::array<int, 4> xyzc(const Shape& shape) {
  check(shape.size() == 5, ErrorKind::kShape, "expected [N,D,H,W,C]");
  return {shape[3], shape[2], shape[1], shape[4]};
}

void save_model(const I2IModel& model, const std::filesystem::path& path, const json& extra_metadata) {
  json meta = extra_metadata;
  meta["kind"] = "i2i";
  meta["config"] = model.config.to_json();
  ad::save_parameters(model.params, meta, path);
}

I2IModel load_model(const std::filesystem::path& path) {
  ad::DecodedParameters decoded = ad::load_parameters(path);
  if (decoded.metadata.value("kind", "") != "i2i" || !decoded.metadata.contains("config")) {
    fail(ErrorKind::kFormat, path.string() + " is not an i2i model file");
  }
  I2IModel model;
  model.config = I2IModelConfig::from_json(decoded.metadata["config"]);
  model.params = std::move(decoded.params);
  // Every expected parameter must be present with the configured shape.
  ParameterSet expected = init_model(model.config, 0);
  for (const auto& [name, t] : expected.learnable) {
    auto it = model.params.learnable.find(name);
    if (it == model.params.learnable.end() || it->second.shape() != t.shape()) {
      fail(ErrorKind::kFormat, path.string() + ": parameter " + name + " missing or misshapen");
    }
  }
  if (!model.params.running.count(kBnStats)) {
    fail(ErrorKind::kFormat, path.string() + ": batch-norm statistics missing");
  }
  return model;
}

}  // namespace longipet
