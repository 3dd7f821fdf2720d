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

#include "longipet/ops.hpp"

#include <cmath>

#include "longipet/error.hpp"
#include "longipet/parallel.hpp"

namespace longipet::ad {
namespace {

struct Spatial {
  int n, d, h, w, c;
  std::size_t positions() const {
    return static_cast<std::size_t>(n) * d * h * w;
  }
};

Spatial spatial(const Tensor& t, const char* what) {
  if (t.shape().size() != 5) {
    fail(ErrorKind::kShape, std::string(what) + ": expected [N,D,H,W,C], got " + shape_string(t.shape()));
  }
  return {t.dim(0), t.dim(1), t.dim(2), t.dim(3), t.dim(4)};
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::kShape, std::string(what) + ": shapes " + shape_string(a.shape()) + " vs " +
                                shape_string(b.shape()));
  }
}

// Geometry of a stride-1 same-padded 3D convolution from `ci` to `co` channels.
struct ConvGeom {
  int n, d, h, w;
  int ci, co;
  int k, r;

  std::size_t voxel(int b, int z, int y, int x) const {
    return ((static_cast<std::size_t>(b) * d + z) * h + y) * w + x;
  }
};

// out[p, co] += sum_{k, ci} in[p + k - r, ci] * kernel[k, ci, co]
// Work is split over (batch, z) slabs; each output element has a single writer
// and a fixed summation order.
void conv_gather(const double* in, const double* kernel, double* out, const ConvGeom& g) {
  parallel_for(static_cast<std::size_t>(g.n) * g.d, [&](std::size_t slab) {
    const int b = static_cast<int>(slab / g.d);
    const int z = static_cast<int>(slab % g.d);
    for (int y = 0; y < g.h; ++y) {
      for (int x = 0; x < g.w; ++x) {
        double* o = out + g.voxel(b, z, y, x) * g.co;
        for (int kz = 0; kz < g.k; ++kz) {
          const int iz = z + kz - g.r;
          if (iz < 0 || iz >= g.d) continue;
          for (int ky = 0; ky < g.k; ++ky) {
            const int iy = y + ky - g.r;
            if (iy < 0 || iy >= g.h) continue;
            for (int kx = 0; kx < g.k; ++kx) {
              const int ix = x + kx - g.r;
              if (ix < 0 || ix >= g.w) continue;
              const double* ip = in + g.voxel(b, iz, iy, ix) * g.ci;
              const double* kp = kernel + static_cast<std::size_t>((kz * g.k + ky) * g.k + kx) * g.ci * g.co;
              for (int c = 0; c < g.ci; ++c) {
                const double v = ip[c];
                const double* kr = kp + static_cast<std::size_t>(c) * g.co;
                for (int o2 = 0; o2 < g.co; ++o2) o[o2] += v * kr[o2];
              }
            }
          }
        }
      }
    }
  });
}

// Adjoint of conv_gather w.r.t. its input:
// in_grad[q, ci] += sum_{k, co} out_grad[q - k + r, co] * kernel[k, ci, co]
void conv_scatter_adjoint(const double* out_grad, const double* kernel, double* in_grad,
                          const ConvGeom& g) {
  parallel_for(static_cast<std::size_t>(g.n) * g.d, [&](std::size_t slab) {
    const int b = static_cast<int>(slab / g.d);
    const int z = static_cast<int>(slab % g.d);
    for (int y = 0; y < g.h; ++y) {
      for (int x = 0; x < g.w; ++x) {
        double* gi = in_grad + g.voxel(b, z, y, x) * g.ci;
        for (int kz = 0; kz < g.k; ++kz) {
          const int oz = z - kz + g.r;
          if (oz < 0 || oz >= g.d) continue;
          for (int ky = 0; ky < g.k; ++ky) {
            const int oy = y - ky + g.r;
            if (oy < 0 || oy >= g.h) continue;
            for (int kx = 0; kx < g.k; ++kx) {
              const int ox = x - kx + g.r;
              if (ox < 0 || ox >= g.w) continue;
              const double* go = out_grad + g.voxel(b, oz, oy, ox) * g.co;
              const double* kp = kernel + static_cast<std::size_t>((kz * g.k + ky) * g.k + kx) * g.ci * g.co;
              for (int c = 0; c < g.ci; ++c) {
                const double* kr = kp + static_cast<std::size_t>(c) * g.co;
                double acc = 0.0;
                for (int o2 = 0; o2 < g.co; ++o2) acc += go[o2] * kr[o2];
                gi[c] += acc;
              }
            }
          }
        }
      }
    }
  });
}

// kernel_grad[k, ci, co] += sum_p in[p + k - r, ci] * out_grad[p, co]
// Serial: every position contributes to every kernel tap.
void conv_kernel_grad(const double* in, const double* out_grad, double* kernel_grad,
                      const ConvGeom& g) {
  for (int b = 0; b < g.n; ++b) {
    for (int z = 0; z < g.d; ++z) {
      for (int y = 0; y < g.h; ++y) {
        for (int x = 0; x < g.w; ++x) {
          const double* go = out_grad + g.voxel(b, z, y, x) * g.co;
          for (int kz = 0; kz < g.k; ++kz) {
            const int iz = z + kz - g.r;
            if (iz < 0 || iz >= g.d) continue;
            for (int ky = 0; ky < g.k; ++ky) {
              const int iy = y + ky - g.r;
              if (iy < 0 || iy >= g.h) continue;
              for (int kx = 0; kx < g.k; ++kx) {
                const int ix = x + kx - g.r;
                if (ix < 0 || ix >= g.w) continue;
                const double* ip = in + g.voxel(b, iz, iy, ix) * g.ci;
                double* kp = kernel_grad + static_cast<std::size_t>((kz * g.k + ky) * g.k + kx) * g.ci * g.co;
                for (int c = 0; c < g.ci; ++c) {
                  const double v = ip[c];
                  double* kr = kp + static_cast<std::size_t>(c) * g.co;
                  for (int o2 = 0; o2 < g.co; ++o2) kr[o2] += v * go[o2];
                }
              }
            }
          }
        }
      }
    }
  }
}

void fill_bias(double* out, const double* bias, std::size_t positions, int channels) {
  for (std::size_t p = 0; p < positions; ++p) {
    for (int c = 0; c < channels; ++c) out[p * channels + c] = bias[c];
  }
}

void accumulate_bias_grad(const double* out_grad, double* bias_grad, std::size_t positions,
                          int channels) {
  for (std::size_t p = 0; p < positions; ++p) {
    for (int c = 0; c < channels; ++c) bias_grad[c] += out_grad[p * channels + c];
  }
}

int check_conv_kernel(const Tensor& kernel, const Tensor& bias, int in_channels, int bias_channels_axis,
                      const char* what) {
  const Shape& ks = kernel.shape();
  if (ks.size() != 5 || ks[0] != ks[1] || ks[1] != ks[2] || ks[0] % 2 == 0) {
    fail(ErrorKind::kShape, std::string(what) + ": kernel must be [k,k,k,*,*] with odd k, got " +
                                shape_string(ks));
  }
  const int in_axis = bias_channels_axis == 4 ? 3 : 4;
  if (ks[in_axis] != in_channels) {
    fail(ErrorKind::kShape, std::string(what) + ": kernel expects " + std::to_string(ks[in_axis]) +
                                " input channels, input has " + std::to_string(in_channels));
  }
  if (bias.shape() != Shape{ks[bias_channels_axis]}) {
    fail(ErrorKind::kShape, std::string(what) + ": bias must be [" +
                                std::to_string(ks[bias_channels_axis]) + "], got " +
                                shape_string(bias.shape()));
  }
  return ks[0];
}

template <typename F, typename D>
Tensor unary(const Tensor& x, const char* op, F f, D dfdx_from_xy) {
  std::vector<double> y(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xv[i]);
  return Tensor::make_result(x.shape(), std::move(y), op, {x}, [dfdx_from_xy](Node& self) {
    Node& in = *self.parents[0];
    auto& g = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * dfdx_from_xy(in.value[i], self.value[i]);
  });
}

}  // namespace

Tensor conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  const Spatial s = spatial(input, "conv3d");
  const int k = check_conv_kernel(kernel, bias, s.c, 4, "conv3d");
  const ConvGeom g{s.n, s.d, s.h, s.w, s.c, kernel.dim(4), k, k / 2};
  std::vector<double> out(s.positions() * g.co);
  fill_bias(out.data(), bias.values().data(), s.positions(), g.co);
  conv_gather(input.values().data(), kernel.values().data(), out.data(), g);
  return Tensor::make_result({s.n, s.d, s.h, s.w, g.co}, std::move(out), "conv3d",
                             {input, kernel, bias}, [g](Node& self) {
    Node& in = *self.parents[0];
    Node& ker = *self.parents[1];
    Node& b = *self.parents[2];
    if (in.requires_grad) conv_scatter_adjoint(self.grad.data(), ker.value.data(), in.grad_buffer().data(), g);
    if (ker.requires_grad) conv_kernel_grad(in.value.data(), self.grad.data(), ker.grad_buffer().data(), g);
    if (b.requires_grad) {
      accumulate_bias_grad(self.grad.data(), b.grad_buffer().data(),
                           static_cast<std::size_t>(g.n) * g.d * g.h * g.w, g.co);
    }
  });
}

Tensor conv_transpose3d(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  const Spatial s = spatial(input, "conv_transpose3d");
  const int k = check_conv_kernel(kernel, bias, s.c, 3, "conv_transpose3d");
  const int out_channels = kernel.dim(3);
  // Viewed as the adjoint of a conv3d from `out_channels` to `s.c` channels.
  const ConvGeom g{s.n, s.d, s.h, s.w, out_channels, s.c, k, k / 2};
  std::vector<double> out(s.positions() * out_channels);
  fill_bias(out.data(), bias.values().data(), s.positions(), out_channels);
  conv_scatter_adjoint(input.values().data(), kernel.values().data(), out.data(), g);
  return Tensor::make_result({s.n, s.d, s.h, s.w, out_channels}, std::move(out), "conv_transpose3d",
                             {input, kernel, bias}, [g](Node& self) {
    Node& in = *self.parents[0];
    Node& ker = *self.parents[1];
    Node& b = *self.parents[2];
    if (in.requires_grad) conv_gather(self.grad.data(), ker.value.data(), in.grad_buffer().data(), g);
    if (ker.requires_grad) conv_kernel_grad(self.grad.data(), in.value.data(), ker.grad_buffer().data(), g);
    if (b.requires_grad) {
      accumulate_bias_grad(self.grad.data(), b.grad_buffer().data(),
                           static_cast<std::size_t>(g.n) * g.d * g.h * g.w, g.ci);
    }
  });
}

Tensor maxpool3d(const Tensor& input) {
  const Spatial s = spatial(input, "maxpool3d");
  if (s.d % 2 || s.h % 2 || s.w % 2) {
    fail(ErrorKind::kShape, "maxpool3d: spatial dims must be even, got " + shape_string(input.shape()));
  }
  const int od = s.d / 2, oh = s.h / 2, ow = s.w / 2;
  const std::size_t out_size = static_cast<std::size_t>(s.n) * od * oh * ow * s.c;
  std::vector<double> out(out_size);
  std::vector<std::size_t> argmax(out_size);
  auto in = input.values();
  auto in_index = [&](int b, int z, int y, int x, int c) {
    return ((((static_cast<std::size_t>(b) * s.d + z) * s.h + y) * s.w + x) * s.c) + c;
  };
  std::size_t o = 0;
  for (int b = 0; b < s.n; ++b) {
    for (int z = 0; z < od; ++z) {
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          for (int c = 0; c < s.c; ++c, ++o) {
            std::size_t best = in_index(b, 2 * z, 2 * y, 2 * x, c);
            for (int dz = 0; dz < 2; ++dz) {
              for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                  std::size_t i = in_index(b, 2 * z + dz, 2 * y + dy, 2 * x + dx, c);
                  if (in[i] > in[best]) best = i;
                }
              }
            }
            out[o] = in[best];
            argmax[o] = best;
          }
        }
      }
    }
  }
  return Tensor::make_result({s.n, od, oh, ow, s.c}, std::move(out), "maxpool3d", {input},
                             [argmax = std::move(argmax)](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += self.grad[i];
  });
}

Tensor upsample_nn(const Tensor& input) {
  const Spatial s = spatial(input, "upsample_nn");
  const int od = 2 * s.d, oh = 2 * s.h, ow = 2 * s.w;
  std::vector<double> out(static_cast<std::size_t>(s.n) * od * oh * ow * s.c);
  auto in = input.values();
  auto src = [s](int b, int z, int y, int x) {
    return (((static_cast<std::size_t>(b) * s.d + z / 2) * s.h + y / 2) * s.w + x / 2) * s.c;
  };
  std::size_t o = 0;
  for (int b = 0; b < s.n; ++b) {
    for (int z = 0; z < od; ++z) {
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          const std::size_t i = src(b, z, y, x);
          for (int c = 0; c < s.c; ++c) out[o++] = in[i + c];
        }
      }
    }
  }
  return Tensor::make_result({s.n, od, oh, ow, s.c}, std::move(out), "upsample_nn", {input},
                             [s, src](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    std::size_t o2 = 0;
    for (int b = 0; b < s.n; ++b) {
      for (int z = 0; z < 2 * s.d; ++z) {
        for (int y = 0; y < 2 * s.h; ++y) {
          for (int x = 0; x < 2 * s.w; ++x) {
            const std::size_t i = src(b, z, y, x);
            for (int c = 0; c < s.c; ++c) g[i + c] += self.grad[o2++];
          }
        }
      }
    }
  });
}

Tensor batchnorm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                 BatchNormStats& stats, Mode mode, const BatchNormOptions& options) {
  check(!input.shape().empty(), ErrorKind::kShape, "batchnorm: scalar input");
  const int channels = input.shape().back();
  check(gamma.shape() == Shape{channels} && beta.shape() == Shape{channels}, ErrorKind::kShape,
        "batchnorm: gamma/beta must be [" + std::to_string(channels) + "]");
  const std::size_t count = input.size() / static_cast<std::size_t>(channels);
  auto x = input.values();
  auto gm = gamma.values();
  auto bt = beta.values();

  std::vector<double> mean(channels, 0.0), var(channels, 0.0);
  if (mode == Mode::kTrain) {
    for (std::size_t p = 0; p < count; ++p) {
      for (int c = 0; c < channels; ++c) mean[c] += x[p * channels + c];
    }
    for (double& m : mean) m /= static_cast<double>(count);
    for (std::size_t p = 0; p < count; ++p) {
      for (int c = 0; c < channels; ++c) {
        const double dv = x[p * channels + c] - mean[c];
        var[c] += dv * dv;
      }
    }
    for (double& v : var) v /= static_cast<double>(count);
    if (!stats.initialized) {
      stats.mean = mean;
      stats.var = var;
      stats.initialized = true;
    } else {
      check(stats.mean.size() == static_cast<std::size_t>(channels), ErrorKind::kShape,
            "batchnorm: running statistics have the wrong channel count");
      for (int c = 0; c < channels; ++c) {
        stats.mean[c] = options.momentum * stats.mean[c] + (1.0 - options.momentum) * mean[c];
        stats.var[c] = options.momentum * stats.var[c] + (1.0 - options.momentum) * var[c];
      }
    }
  } else {
    if (!stats.initialized) fail(ErrorKind::kState, "batchnorm: inference before running statistics exist");
    check(stats.mean.size() == static_cast<std::size_t>(channels), ErrorKind::kShape,
          "batchnorm: running statistics have the wrong channel count");
    mean = stats.mean;
    var = stats.var;
  }

  std::vector<double> inv_std(channels);
  for (int c = 0; c < channels; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + options.eps);
  std::vector<double> xhat(input.size()), y(input.size());
  for (std::size_t p = 0; p < count; ++p) {
    for (int c = 0; c < channels; ++c) {
      const std::size_t i = p * channels + c;
      xhat[i] = (x[i] - mean[c]) * inv_std[c];
      y[i] = gm[c] * xhat[i] + bt[c];
    }
  }
  const bool batch_stats = mode == Mode::kTrain;
  return Tensor::make_result(input.shape(), std::move(y), "batchnorm", {input, gamma, beta},
                             [xhat = std::move(xhat), inv_std, channels, count, batch_stats](Node& self) {
    Node& in = *self.parents[0];
    Node& gam = *self.parents[1];
    Node& bet = *self.parents[2];
    std::vector<double> sum_dy(channels, 0.0), sum_dy_xhat(channels, 0.0);
    for (std::size_t p = 0; p < count; ++p) {
      for (int c = 0; c < channels; ++c) {
        const std::size_t i = p * channels + c;
        sum_dy[c] += self.grad[i];
        sum_dy_xhat[c] += self.grad[i] * xhat[i];
      }
    }
    if (gam.requires_grad) {
      auto& g = gam.grad_buffer();
      for (int c = 0; c < channels; ++c) g[c] += sum_dy_xhat[c];
    }
    if (bet.requires_grad) {
      auto& g = bet.grad_buffer();
      for (int c = 0; c < channels; ++c) g[c] += sum_dy[c];
    }
    if (in.requires_grad) {
      auto& g = in.grad_buffer();
      const double m = static_cast<double>(count);
      for (std::size_t p = 0; p < count; ++p) {
        for (int c = 0; c < channels; ++c) {
          const std::size_t i = p * channels + c;
          const double scale = gam.value[c] * inv_std[c];
          if (batch_stats) {
            g[i] += scale * (self.grad[i] - sum_dy[c] / m - xhat[i] * sum_dy_xhat[c] / m);
          } else {
            g[i] += scale * self.grad[i];
          }
        }
      }
    }
  });
}

Tensor relu(const Tensor& x) {
  return unary(x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary(x, "tanh", [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
               [](double, double y) { return y * (1.0 - y); });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> y(a.size());
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  return Tensor::make_result(a.shape(), std::move(y), "add", {a, b}, [](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> y(a.size());
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  return Tensor::make_result(a.shape(), std::move(y), "mul", {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.value[i];
    }
  });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  check(a.shape().size() == b.shape().size() && !a.shape().empty(), ErrorKind::kShape,
        "concat_channels: rank mismatch");
  for (std::size_t i = 0; i + 1 < a.shape().size(); ++i) {
    check(a.shape()[i] == b.shape()[i], ErrorKind::kShape,
          "concat_channels: shapes " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  const int ca = a.shape().back(), cb = b.shape().back();
  const std::size_t rows = a.size() / ca;
  Shape shape = a.shape();
  shape.back() = ca + cb;
  std::vector<double> y(rows * (ca + cb));
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.begin() + r * ca, ca, y.begin() + r * (ca + cb));
    std::copy_n(bv.begin() + r * cb, cb, y.begin() + r * (ca + cb) + ca);
  }
  return Tensor::make_result(std::move(shape), std::move(y), "concat_channels", {a, b},
                             [ca, cb, rows](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const int ct = ca + cb;
    if (pa.requires_grad) {
      auto& g = pa.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (int c = 0; c < ca; ++c) g[r * ca + c] += self.grad[r * ct + c];
      }
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (int c = 0; c < cb; ++c) g[r * cb + c] += self.grad[r * ct + ca + c];
      }
    }
  });
}

Tensor slice_channels(const Tensor& x, int start, int count) {
  check(!x.shape().empty(), ErrorKind::kShape, "slice_channels: scalar input");
  const int ct = x.shape().back();
  check(start >= 0 && count > 0 && start + count <= ct, ErrorKind::kShape,
        "slice_channels: [" + std::to_string(start) + ", +" + std::to_string(count) + ") out of " +
            std::to_string(ct) + " channels");
  const std::size_t rows = x.size() / ct;
  Shape shape = x.shape();
  shape.back() = count;
  std::vector<double> y(rows * count);
  auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.begin() + r * ct + start, count, y.begin() + r * count);
  }
  return Tensor::make_result(std::move(shape), std::move(y), "slice_channels", {x},
                             [ct, start, count, rows](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      for (int c = 0; c < count; ++c) g[r * ct + start + c] += self.grad[r * count + c];
    }
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return Tensor::make_result({1}, {s}, "sum", {x}, [](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mae_loss(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mae_loss");
  auto p = pred.values();
  auto t = target.values();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - t[i]);
  const double n = static_cast<double>(p.size());
  return Tensor::make_result({1}, {s / n}, "mae_loss", {pred, target}, [n](Node& self) {
    Node& pp = *self.parents[0];
    Node& pt = *self.parents[1];
    const double g = self.grad[0] / n;
    for (int side = 0; side < 2; ++side) {
      Node& target_node = side == 0 ? pp : pt;
      if (!target_node.requires_grad) continue;
      const double sign = side == 0 ? 1.0 : -1.0;
      auto& gb = target_node.grad_buffer();
      for (std::size_t i = 0; i < gb.size(); ++i) {
        const double d = pp.value[i] - pt.value[i];
        gb[i] += sign * g * (d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : 0.0);
      }
    }
  });
}

LstmState convlstm3d_step(const Tensor& x, const LstmState& prev, const Tensor& kernel,
                          const Tensor& bias) {
  const Spatial s = spatial(x, "convlstm3d_step");
  check(kernel.shape().size() == 5 && kernel.dim(4) % 4 == 0, ErrorKind::kShape,
        "convlstm3d_step: kernel must be [k,k,k,Cx+F,4F], got " + shape_string(kernel.shape()));
  const int filters = kernel.dim(4) / 4;
  check(kernel.dim(3) == s.c + filters, ErrorKind::kShape,
        "convlstm3d_step: kernel expects " + std::to_string(kernel.dim(3)) + " input channels, have " +
            std::to_string(s.c) + " + " + std::to_string(filters));
  const Shape state_shape{s.n, s.d, s.h, s.w, filters};
  Tensor h = prev.h.defined() ? prev.h : Tensor::zeros(state_shape);
  Tensor c = prev.c.defined() ? prev.c : Tensor::zeros(state_shape);
  check(h.shape() == state_shape && c.shape() == state_shape, ErrorKind::kShape,
        "convlstm3d_step: state must be " + shape_string(state_shape));

  Tensor gates = conv3d(concat_channels(x, h), kernel, bias);
  Tensor i = sigmoid(slice_channels(gates, 0, filters));
  Tensor f = sigmoid(slice_channels(gates, filters, filters));
  Tensor g = tanh(slice_channels(gates, 2 * filters, filters));
  Tensor o = sigmoid(slice_channels(gates, 3 * filters, filters));
  Tensor c_next = add(mul(f, c), mul(i, g));
  Tensor h_next = mul(o, tanh(c_next));
  return {h_next, c_next};
}

}  // namespace longipet::ad
