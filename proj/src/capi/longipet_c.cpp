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

#include "longipet/longipet.h"

#include <cstdlib>
#include <cstring>
#include <set>
#include <string>

#include "json.hpp"
#include "longipet/error.hpp"
#include "longipet/hashing.hpp"
#include "longipet/i2i_model.hpp"
#include "longipet/linear_forecaster.hpp"
#include "longipet/metrics.hpp"
#include "longipet/pipeline.hpp"
#include "longipet/volume_io.hpp"

struct lp_volume {
  longipet::Volume3D vol;
};

struct lp_model {
  longipet::I2IModel model;
};

namespace {

using longipet::ErrorKind;
using nlohmann::json;

thread_local std::string g_last_error;

// Signals a malformed option object; maps to LP_ERR_USAGE.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

lp_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return LP_ERR_IO;
    case ErrorKind::kFormat: return LP_ERR_FORMAT;
    case ErrorKind::kUnsupported: return LP_ERR_UNSUPPORTED;
    case ErrorKind::kCorrupt: return LP_ERR_CORRUPT;
    case ErrorKind::kManifest: return LP_ERR_MANIFEST;
    case ErrorKind::kShape: return LP_ERR_SHAPE;
    case ErrorKind::kParameter: return LP_ERR_PARAMETER;
    case ErrorKind::kNormalization: return LP_ERR_NORMALIZATION;
    case ErrorKind::kState: return LP_ERR_STATE;
    case ErrorKind::kInput: return LP_ERR_INPUT;
    case ErrorKind::kDivergence: return LP_ERR_DIVERGENCE;
    case ErrorKind::kPlan: return LP_ERR_PLAN;
    case ErrorKind::kLeakage: return LP_ERR_LEAKAGE;
    case ErrorKind::kDegenerate: return LP_ERR_DEGENERATE;
    case ErrorKind::kContract: return LP_ERR_CONTRACT;
    case ErrorKind::kUsage: return LP_ERR_USAGE;
  }
  return LP_ERR_INTERNAL;
}

template <typename F>
lp_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return LP_OK;
  } catch (const longipet::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const UsageError& e) {
    g_last_error = std::string("usage error: ") + e.what();
    return LP_ERR_USAGE;
  } catch (const json::exception& e) {
    g_last_error = std::string("usage error: ") + e.what();
    return LP_ERR_USAGE;
  } catch (const std::bad_alloc&) {
    g_last_error = "internal error: out of memory";
    return LP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
    return LP_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) longipet::fail(ErrorKind::kContract, std::string(what) + " must not be NULL");
}

// Option reader that rejects unknown keys and reports missing ones.
class Options {
 public:
  Options(const json& j, std::set<std::string> allowed) : j_(j) {
    if (!j_.is_object()) throw UsageError("options must be a JSON object");
    for (const auto& [k, v] : j_.items()) {
      if (!allowed.count(k)) throw UsageError("unknown option '" + k + "'");
    }
  }
  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  template <typename T>
  T get(const std::string& k, T fallback) const {
    return has(k) ? j_.at(k).get<T>() : fallback;
  }
  std::string path(const std::string& k) const {
    if (!has(k)) throw UsageError("missing required option '" + k + "'");
    return j_.at(k).get<std::string>();
  }
  std::string opt_path(const std::string& k) const { return has(k) ? j_.at(k).get<std::string>() : std::string(); }
  const json& raw(const std::string& k) const { return j_.at(k); }

 private:
  const json& j_;
};

json dispatch(const std::string& command, const json& j) {
  using namespace longipet;
  if (command == "phantom") {
    Options o(j, {"out", "dims", "cn", "mci", "dem", "years", "noise", "seed", "beta", "gamma", "base_level",
                  "blob_count", "blob_amplitude", "roi_labels"});
    json cfg = json::object();
    if (o.has("dims")) {
      const json& d = o.raw("dims");
      cfg["dims"] = d.is_array() ? d : json::array({d, d, d});
    }
    const std::pair<const char*, const char*> keys[] = {
        {"cn", "cn"},     {"mci", "mci"},         {"dem", "dementia"},         {"years", "years"},
        {"noise", "noise_sigma"}, {"seed", "seed"}, {"beta", "beta"},         {"gamma", "gamma"},
        {"base_level", "base_level"}, {"blob_count", "blob_count"}, {"blob_amplitude", "blob_amplitude"},
        {"roi_labels", "roi_labels"}};
    for (const auto& [from, to] : keys) {
      if (o.has(from)) cfg[to] = o.raw(from);
    }
    return run_phantom({PhantomConfig::from_json(cfg), o.path("out")});
  }
  if (command == "preprocess") {
    Options o(j, {"manifest", "reference_mask", "brain_mask", "out", "fwhm", "order", "pad"});
    PreprocessRun run{o.path("manifest"), o.path("reference_mask"), o.path("brain_mask"), o.path("out"), {}};
    if (o.has("fwhm")) {
      const json& f = o.raw("fwhm");
      if (f.is_array()) {
        run.options.fwhm_voxels = f.get<std::array<double, 3>>();
      } else {
        const double v = f.get<double>();
        run.options.fwhm_voxels = {v, v, v};
      }
    }
    const std::string order = o.get<std::string>("order", "suvr,mask,smooth");
    if (order == "suvr,mask,smooth") {
      run.options.order = PipelineOrder::kSuvrMaskSmooth;
    } else if (order == "suvr,smooth,mask") {
      run.options.order = PipelineOrder::kSuvrSmoothMask;
    } else {
      throw UsageError("order must be 'suvr,mask,smooth' or 'suvr,smooth,mask'");
    }
    run.options.pad = o.get<bool>("pad", true);
    return run_preprocess(run);
  }
  if (command == "augment") {
    Options o(j, {"manifest", "out", "copies", "seed", "anisotropic_zoom"});
    AugmentRun run{o.path("manifest"), o.path("out"), o.get<int>("copies", 2), o.get<std::uint64_t>("seed", 0), {}};
    run.ranges.anisotropic_zoom = o.get<bool>("anisotropic_zoom", false);
    return run_augment(run);
  }
  if (command == "train") {
    Options o(j, {"manifest", "config", "folds", "out", "seed", "epochs", "batch", "copies", "learning_rate",
                  "lstm_filters", "decoder_filters"});
    TrainRun run;
    run.manifest = o.path("manifest");
    run.config = o.opt_path("config");
    run.folds = o.opt_path("folds");
    run.out = o.path("out");
    run.seed = o.get<std::uint64_t>("seed", 0);
    run.hyper.epochs = o.get<int>("epochs", run.hyper.epochs);
    run.hyper.batch = o.get<int>("batch", run.hyper.batch);
    run.hyper.copies = o.get<int>("copies", run.hyper.copies);
    run.hyper.adam.learning_rate = o.get<double>("learning_rate", run.hyper.adam.learning_rate);
    if (o.has("lstm_filters")) run.lstm_filters = o.get<int>("lstm_filters", 0);
    if (o.has("decoder_filters")) run.decoder_filters = o.get<int>("decoder_filters", 0);
    return run_train(run);
  }
  if (command == "predict") {
    Options o(j, {"model", "y0", "y1", "out", "clamp"});
    return run_predict({o.path("model"), o.path("y0"), o.path("y1"), o.path("out"), o.get<bool>("clamp", false)});
  }
  if (command == "forecast") {
    Options o(j, {"predictor", "manifest", "folds", "models", "to_year", "out", "clamp"});
    auto p = parse_predictor(o.path("predictor"));
    if (!p) throw UsageError("predictor must be 'i2i' or 'linear'");
    ForecastRun run{*p, o.path("manifest"), o.opt_path("folds"), o.opt_path("models"), o.get<int>("to_year", 7),
                    o.path("out"), o.get<bool>("clamp", false)};
    if (run.models.empty() && !run.folds.empty()) run.models = run.folds.parent_path();
    return run_forecast(run);
  }
  if (command == "evaluate") {
    Options o(j, {"predictions", "manifest", "atlas", "roi", "mask", "out", "predictors"});
    EvaluateRun run;
    run.options.predictions = o.path("predictions");
    run.options.manifest = o.path("manifest");
    run.options.atlas = o.opt_path("atlas");
    run.options.roi = o.opt_path("roi");
    run.options.brain_mask = o.opt_path("mask");
    run.options.predictors = o.get<std::vector<std::string>>("predictors", {});
    run.out = o.path("out");
    return run_evaluate(run);
  }
  if (command == "stats") {
    Options o(j, {"input", "test", "out", "alpha"});
    auto t = parse_stats_test(o.path("test"));
    if (!t) throw UsageError("test must be one of wilcoxon, ttest, anova, chi2, mixed");
    return run_stats_file({o.path("input"), *t, o.path("out"), o.get<double>("alpha", 0.05)});
  }
  if (command == "report") {
    Options o(j, {"metrics", "out"});
    return run_report({o.path("metrics"), o.path("out")});
  }
  throw UsageError("unknown command '" + command + "'");
}

}  // namespace

extern "C" {

const char* lp_version(void) { return "0.1.0"; }

const char* lp_status_name(lp_status status) {
  switch (status) {
    case LP_OK: return "ok";
    case LP_ERR_USAGE: return "usage";
    case LP_ERR_IO: return "io";
    case LP_ERR_FORMAT: return "format";
    case LP_ERR_UNSUPPORTED: return "unsupported";
    case LP_ERR_CORRUPT: return "corrupt";
    case LP_ERR_MANIFEST: return "manifest";
    case LP_ERR_SHAPE: return "shape";
    case LP_ERR_PARAMETER: return "parameter";
    case LP_ERR_NORMALIZATION: return "normalization";
    case LP_ERR_STATE: return "state";
    case LP_ERR_INPUT: return "input";
    case LP_ERR_DIVERGENCE: return "divergence";
    case LP_ERR_PLAN: return "plan";
    case LP_ERR_LEAKAGE: return "leakage";
    case LP_ERR_DEGENERATE: return "degenerate";
    case LP_ERR_CONTRACT: return "contract";
    case LP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* lp_last_error(void) { return g_last_error.c_str(); }

lp_status lp_volume_create(int nx, int ny, int nz, const double* data, lp_volume** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    const longipet::Dims3 d{nx, ny, nz};
    if (!d.positive()) longipet::fail(ErrorKind::kShape, "dims must be positive");
    auto v = std::make_unique<lp_volume>();
    v->vol = data ? longipet::Volume3D(d, std::vector<double>(data, data + d.voxels())) : longipet::Volume3D(d, 0.0);
    *out = v.release();
  });
}

lp_status lp_volume_read(const char* path, lp_volume** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto v = std::make_unique<lp_volume>();
    v->vol = longipet::read_volume(path);
    *out = v.release();
  });
}

lp_status lp_volume_write(const lp_volume* vol, const char* path) {
  return guarded([&] {
    need(vol, "vol");
    need(path, "path");
    longipet::write_volume(vol->vol, path);
  });
}

lp_status lp_volume_dims(const lp_volume* vol, int* nx, int* ny, int* nz) {
  return guarded([&] {
    need(vol, "vol");
    const auto& d = vol->vol.dims();
    if (nx) *nx = d.nx;
    if (ny) *ny = d.ny;
    if (nz) *nz = d.nz;
  });
}

lp_status lp_volume_copy_data(const lp_volume* vol, double* out, size_t count) {
  return guarded([&] {
    need(vol, "vol");
    need(out, "out");
    if (count < vol->vol.size()) {
      longipet::fail(ErrorKind::kShape, "buffer holds " + std::to_string(count) + " values, volume has " +
                                            std::to_string(vol->vol.size()));
    }
    std::memcpy(out, vol->vol.values().data(), vol->vol.size() * sizeof(double));
  });
}

lp_status lp_volume_pad_to_even(const lp_volume* vol, lp_volume** out) {
  return guarded([&] {
    need(vol, "vol");
    need(out, "out");
    *out = nullptr;
    auto v = std::make_unique<lp_volume>();
    v->vol = longipet::pad_to_even(vol->vol);
    *out = v.release();
  });
}

void lp_volume_free(lp_volume* vol) { delete vol; }

lp_status lp_predict_linear(const lp_volume* prev2, const lp_volume* prev1, int clamp, lp_volume** out) {
  return guarded([&] {
    need(prev2, "prev2");
    need(prev1, "prev1");
    need(out, "out");
    *out = nullptr;
    auto v = std::make_unique<lp_volume>();
    v->vol = longipet::predict_linear(prev2->vol, prev1->vol, longipet::LinearOptions{clamp != 0});
    *out = v.release();
  });
}

lp_status lp_model_init(int nx, int ny, int nz, int lstm_filters, int decoder_filters, uint64_t seed,
                        lp_model** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto m = std::make_unique<lp_model>();
    m->model.config.dims = {nx, ny, nz};
    m->model.config.lstm_filters = lstm_filters;
    m->model.config.decoder_filters = decoder_filters;
    m->model.params = longipet::init_model(m->model.config, seed);
    *out = m.release();
  });
}

lp_status lp_model_load(const char* path, lp_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto m = std::make_unique<lp_model>();
    m->model = longipet::load_model(path);
    *out = m.release();
  });
}

lp_status lp_model_save(const lp_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    longipet::save_model(model->model, path);
  });
}

lp_status lp_model_dims(const lp_model* model, int* nx, int* ny, int* nz) {
  return guarded([&] {
    need(model, "model");
    const auto& d = model->model.config.dims;
    if (nx) *nx = d.nx;
    if (ny) *ny = d.ny;
    if (nz) *nz = d.nz;
  });
}

lp_status lp_model_predict(const lp_model* model, const lp_volume* baseline, const lp_volume* year1,
                           lp_volume** out) {
  return guarded([&] {
    need(model, "model");
    need(baseline, "baseline");
    need(year1, "year1");
    need(out, "out");
    *out = nullptr;
    auto v = std::make_unique<lp_volume>();
    v->vol = longipet::predict(model->model, baseline->vol, year1->vol);
    *out = v.release();
  });
}

lp_status lp_model_trace(const lp_model* model, const lp_volume* baseline, const lp_volume* year1,
                         int lstm_xyzc[4], int pooled_xyzc[4], int output_xyzc[4]) {
  return guarded([&] {
    need(model, "model");
    need(baseline, "baseline");
    need(year1, "year1");
    longipet::ForwardTrace trace;
    longipet::predict(model->model, baseline->vol, year1->vol, &trace);
    auto copy = [](const longipet::ad::Shape& s, int* dst) {
      if (!dst) return;
      const auto v = longipet::xyzc(s);
      for (int i = 0; i < 4; ++i) dst[i] = v[i];
    };
    copy(trace.lstm_hidden, lstm_xyzc);
    copy(trace.pooled, pooled_xyzc);
    copy(trace.output, output_xyzc);
  });
}

void lp_model_free(lp_model* model) { delete model; }

lp_status lp_mae(const lp_volume* a, const lp_volume* b, const lp_volume* mask, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    if (mask) {
      const auto m = longipet::MaskVolume::from_volume(mask->vol, longipet::MaskRole::kBrain);
      *out = longipet::mae(a->vol, b->vol, &m);
    } else {
      *out = longipet::mae(a->vol, b->vol);
    }
  });
}

lp_status lp_ssim3d(const lp_volume* a, const lp_volume* b, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = longipet::ssim3d(a->vol, b->vol);
  });
}

lp_status lp_hash_file(const char* path, char out_hex[65]) {
  return guarded([&] {
    need(path, "path");
    need(out_hex, "out_hex");
    const std::string h = longipet::sha256_file(path);
    std::memcpy(out_hex, h.c_str(), 65);
  });
}

lp_status lp_run(const char* command, const char* options_json, char** run_manifest) {
  return guarded([&] {
    need(command, "command");
    if (run_manifest) *run_manifest = nullptr;
    json options = json::object();
    if (options_json && *options_json) {
      try {
        options = json::parse(options_json);
      } catch (const json::exception& e) {
        throw UsageError(std::string("options are not valid JSON: ") + e.what());
      }
    }
    const std::string text = dispatch(command, options).dump(2);
    if (run_manifest) {
      char* s = static_cast<char*>(std::malloc(text.size() + 1));
      if (!s) throw std::bad_alloc();
      std::memcpy(s, text.c_str(), text.size() + 1);
      *run_manifest = s;
    }
  });
}

void lp_string_free(char* s) { std::free(s); }

}  // extern "C"
