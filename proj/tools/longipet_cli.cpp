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

// Command-line front end. Flags are collected into a JSON option object and
// handed to lp_run; the process exit code is the returned lp_status.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "longipet/longipet.h"

namespace {

using nlohmann::json;

// Flag values land here; only flags given on the command line are forwarded.
struct Collected {
  std::map<std::string, std::string> strings;
  std::map<std::string, double> numbers;
  std::map<std::string, long long> integers;
  std::map<std::string, bool> switches;
  std::map<std::string, std::vector<std::string>> lists;
};

class Command {
 public:
  Command(CLI::App& app, const char* name, const char* help) : sub_(app.add_subcommand(name, help)), name_(name) {}

  Command& path(const char* flag, const char* key, const char* help, bool required = true) {
    auto* o = sub_->add_option(flag, values_.strings[key], help);
    if (required) o->required();
    keys_.push_back({key, o, 's'});
    return *this;
  }
  Command& number(const char* flag, const char* key, const char* help) {
    keys_.push_back({key, sub_->add_option(flag, values_.numbers[key], help), 'd'});
    return *this;
  }
  Command& integer(const char* flag, const char* key, const char* help) {
    keys_.push_back({key, sub_->add_option(flag, values_.integers[key], help), 'i'});
    return *this;
  }
  Command& list(const char* flag, const char* key, const char* help) {
    keys_.push_back({key, sub_->add_option(flag, values_.lists[key], help), 'l'});
    return *this;
  }
  Command& flag(const char* flag, const char* key, const char* help) {
    keys_.push_back({key, sub_->add_flag(flag, values_.switches[key], help), 'b'});
    return *this;
  }

  bool parsed() const { return sub_->parsed(); }
  const std::string& name() const { return name_; }

  json options() const {
    json j = json::object();
    for (const Key& k : keys_) {
      if (k.option->count() == 0) continue;
      switch (k.kind) {
        case 's': j[k.key] = values_.strings.at(k.key); break;
        case 'd': j[k.key] = values_.numbers.at(k.key); break;
        case 'i': j[k.key] = values_.integers.at(k.key); break;
        case 'l': j[k.key] = values_.lists.at(k.key); break;
        case 'b': j[k.key] = values_.switches.at(k.key); break;
      }
    }
    return j;
  }

 private:
  struct Key {
    std::string key;
    CLI::Option* option;
    char kind;
  };
  CLI::App* sub_;
  std::string name_;
  Collected values_;
  std::vector<Key> keys_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"longipet: longitudinal FDG-PET forecasting toolkit", "longipet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lp_version()));

  std::vector<Command> commands;
  commands.reserve(9);

  commands.emplace_back(app, "phantom", "Generate a synthetic longitudinal cohort");
  commands.back()
      .path("--out", "out", "Output directory")
      .integer("--dims", "dims", "Cubic grid size (default 16)")
      .integer("--cn", "cn", "CN subjects (flat trajectory)")
      .integer("--mci", "mci", "MCI subjects (quadratic decline)")
      .integer("--dem", "dem", "Dementia subjects (linear decline)")
      .integer("--years", "years", "Scans per subject, years 0..N-1")
      .number("--noise", "noise", "Additive Gaussian noise sigma")
      .number("--beta", "beta", "Dementia decline per year")
      .number("--gamma", "gamma", "MCI quadratic decline coefficient")
      .integer("--seed", "seed", "Random seed");

  commands.emplace_back(app, "preprocess", "SUVR-normalize, mask, smooth and pad a cohort");
  commands.back()
      .path("--manifest", "manifest", "Cohort manifest")
      .path("--reference-mask", "reference_mask", "Reference-region mask volume")
      .path("--brain-mask", "brain_mask", "Brain mask volume")
      .path("--out", "out", "Output directory")
      .number("--fwhm", "fwhm", "Isotropic smoothing FWHM in voxels (default 4)")
      .path("--order", "order", "suvr,mask,smooth (default) or suvr,smooth,mask", false)
      .flag("--pad,!--no-pad", "pad", "Pad odd axes to even sizes (default on)");

  commands.emplace_back(app, "augment", "Write randomly transformed copies of training triplets");
  commands.back()
      .path("--manifest", "manifest", "Cohort manifest")
      .path("--out", "out", "Output directory")
      .integer("--copies", "copies", "Copies per subject (default 2)")
      .integer("--seed", "seed", "Random seed")
      .flag("--anisotropic-zoom", "anisotropic_zoom", "Draw an independent zoom per axis");

  commands.emplace_back(app, "train", "Five-fold cross-validated training of the image-to-image model");
  commands.back()
      .path("--manifest", "manifest", "Cohort manifest")
      .path("--out", "out", "Output directory")
      .path("--config", "config", "Model config JSON", false)
      .path("--folds", "folds", "Reuse an existing folds.json", false)
      .integer("--seed", "seed", "Random seed")
      .integer("--epochs", "epochs", "Epochs (default 70)")
      .integer("--batch", "batch", "Mini-batch size (default 8)")
      .integer("--copies", "copies", "Augmented copies per training subject (default 2)")
      .number("--lr", "learning_rate", "Adam learning rate (default 1e-3)")
      .integer("--lstm-filters", "lstm_filters", "ConvLSTM filters (default 16)")
      .integer("--decoder-filters", "decoder_filters", "Transposed-convolution filters (default 32)");

  commands.emplace_back(app, "predict", "Predict the next year from two scans");
  commands.back()
      .path("--model", "model", "'linear' or a trained model file")
      .path("--y0", "y0", "Earlier scan")
      .path("--y1", "y1", "Later scan")
      .path("--out", "out", "Output volume")
      .flag("--clamp", "clamp", "Clamp linear predictions at zero");

  commands.emplace_back(app, "forecast", "Recursive multi-year forecasts for a cohort");
  commands.back()
      .path("--predictor", "predictor", "i2i or linear")
      .path("--manifest", "manifest", "Cohort manifest")
      .path("--folds", "folds", "folds.json from training (required for i2i)", false)
      .path("--models", "models", "Directory holding model_<k>.bin", false)
      .integer("--to-year", "to_year", "Last forecast year (default 7)")
      .path("--out", "out", "Output directory")
      .flag("--clamp", "clamp", "Clamp linear predictions at zero");

  commands.emplace_back(app, "evaluate", "Score forecasts against ground truth");
  commands.back()
      .path("--predictions", "predictions", "Forecast directory (<predictor>/<subject>/year_<k>.vol)")
      .path("--manifest", "manifest", "Ground-truth manifest")
      .path("--atlas", "atlas", "Atlas label volume", false)
      .path("--roi", "roi", "Meta-ROI config JSON", false)
      .path("--mask", "mask", "Brain mask: MAE within the brain only", false)
      .list("--predictor", "predictors", "Restrict to these predictors")
      .path("--out", "out", "Metrics CSV");

  commands.emplace_back(app, "stats", "Statistical tests over a metrics CSV");
  commands.back()
      .path("--input", "input", "Metrics CSV")
      .path("--test", "test", "wilcoxon, ttest, anova, chi2 or mixed")
      .number("--alpha", "alpha", "Family-wise alpha before Bonferroni correction (default 0.05)")
      .path("--out", "out", "Output CSV");

  commands.emplace_back(app, "report", "Render an SVG summary of a metrics CSV");
  commands.back().path("--metrics", "metrics", "Metrics CSV").path("--out", "out", "Output SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "longipet: usage error: " << e.what() << "\n\n" << app.help();
    return LP_ERR_USAGE;
  }

  for (const Command& c : commands) {
    if (!c.parsed()) continue;
    const std::string options = c.options().dump();
    char* manifest = nullptr;
    const lp_status status = lp_run(c.name().c_str(), options.c_str(), &manifest);
    if (status != LP_OK) {
      std::cerr << "longipet " << c.name() << ": " << lp_last_error() << "\n";
      return status;
    }
    const json m = json::parse(manifest);
    lp_string_free(manifest);
    std::cout << c.name() << ": ok, " << m["artifacts"].size() << " artifact(s)\n";
    return LP_OK;
  }
  return LP_ERR_USAGE;
}
