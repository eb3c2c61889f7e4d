// a2a/cli/run_config.hpp

// Copyright 2026  a2a-lab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "a2a/evalviz/tsne.hpp"
#include "a2a/featex/augment.hpp"
#include "a2a/inversion/model.hpp"
#include "a2a/mlan/model.hpp"
#include "a2a/numcore/config.hpp"
#include "a2a/recognizer/conformer.hpp"
#include "a2a/recognizer/decode.hpp"
#include "a2a/recognizer/tdnnf.hpp"
#include "a2a/recognizer/train.hpp"
#include "a2a/synth/corpus.hpp"

namespace a2a::cli {

inline constexpr const char *kToolVersion = "0.1.0";

/// Speaker whose features are scaled to probe LHUC adaptation.
struct LhucProbeConfig {
  double feature_scale = 1.3;
  Json ToJson() const { return {{"feature_scale", feature_scale}}; }
  static LhucProbeConfig FromJson(const Json &j) {
    LhucProbeConfig c;
    ConfigReader r(j, "lhuc_probe");
    r.Get("feature_scale", c.feature_scale);
    r.Finish();
    return c;
  }
};

struct VizConfig {
  evalviz::TsneConfig tsne;
  std::size_t points_per_phone = 150;

  Json ToJson() const { return {{"tsne", tsne.ToJson()}, {"points_per_phone", points_per_phone}}; }
  static VizConfig FromJson(const Json &j) {
    VizConfig c;
    ConfigReader r(j, "viz");
    if (const Json *t = r.Sub("tsne")) c.tsne = evalviz::TsneConfig::FromJson(*t, "viz.tsne");
    r.Get("points_per_phone", c.points_per_phone);
    r.Finish();
    if (c.points_per_phone < 5) throw ConfigError("viz.points_per_phone must be at least 5");
    return c;
  }
};

/// Everything a run needs. Defaults are the desk-scale pipeline settings;
/// model sizes are reduced from the module defaults so the full pipeline
/// fits a single-core budget.
struct RunConfig {
  std::uint64_t seed = 1;
  std::vector<std::string> domains{"SRC", "TGT_A", "TGT_B"};
  synth::CorpusConfig corpus;
  std::size_t dct_kept = 12;
  std::size_t splice_context = 3;
  inversion::InversionConfig inversion;
  mlan::MlanConfig mlan;
  recognizer::TdnnfConfig tdnnf;
  recognizer::ConformerConfig conformer;
  recognizer::RecognizerTrainConfig train_tdnnf;
  recognizer::RecognizerTrainConfig train_conformer;
  recognizer::LhucConfig lhuc;
  LhucProbeConfig lhuc_probe;
  recognizer::BeamConfig decode;
  recognizer::BeamConfig ctc_decode;
  featex::AugmentPolicy augment;
  std::vector<double> lambda_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> mu_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::size_t> ablate_layers{1, 3, 5};
  VizConfig viz;
  std::size_t jobs = 1;

  RunConfig() {
    inversion.hidden = 64;
    inversion.max_epochs = 15;
    inversion.patience = 3;
    for (auto *l : {&mlan.level1, &mlan.level2}) {
      l->max_epochs = 12;
      l->patience = 3;
    }
    tdnnf.hidden = 128;
    tdnnf.bottleneck = 96;
    tdnnf.fusion.subnet_hidden = 96;
    conformer.dim = 64;
    conformer.blocks = 2;
    conformer.ff_dim = 128;
    train_tdnnf.max_epochs = 4;
    train_tdnnf.patience = 2;
    train_conformer.max_epochs = 15;
    train_conformer.patience = 3;
    lhuc.epochs = 3;
    decode.lm_weight = 2.0;
    decode.insertion_penalty = -8.0;
    decode.min_duration = 3;
    ctc_decode.lm_weight = 0.5;
    ctc_decode.insertion_penalty = 1.0;
  }

  Json ToJson() const {
    return {{"seed", seed},
            {"domains", domains},
            {"corpus", synth::ToJson(corpus)},
            {"dct_kept", dct_kept},
            {"splice_context", splice_context},
            {"inversion", inversion.ToJson()},
            {"mlan", mlan.ToJson()},
            {"tdnnf", tdnnf.ToJson()},
            {"conformer", conformer.ToJson()},
            {"train_tdnnf", train_tdnnf.ToJson()},
            {"train_conformer", train_conformer.ToJson()},
            {"lhuc", lhuc.ToJson()},
            {"lhuc_probe", lhuc_probe.ToJson()},
            {"decode", decode.ToJson()},
            {"ctc_decode", ctc_decode.ToJson()},
            {"augment", augment.ToJson()},
            {"lambda_grid", lambda_grid},
            {"mu_grid", mu_grid},
            {"ablate_layers", ablate_layers},
            {"viz", viz.ToJson()},
            {"jobs", jobs}};
  }

  /// Overlays `j` on the defaults; unknown keys anywhere raise ConfigError.
  static RunConfig FromJson(const Json &j) {
    RunConfig c;
    ConfigReader r(j, "config");
    r.Get("seed", c.seed).Get("domains", c.domains).Get("dct_kept", c.dct_kept).Get("splice_context", c.splice_context);
    auto merged = [](Json base, const Json &over) {
      base.merge_patch(over);
      return base;
    };
    if (const Json *s = r.Sub("corpus")) c.corpus = synth::CorpusConfigFromJson(merged(synth::ToJson(c.corpus), *s));
    if (const Json *s = r.Sub("inversion")) c.inversion = inversion::InversionConfig::FromJson(merged(c.inversion.ToJson(), *s));
    if (const Json *s = r.Sub("mlan")) c.mlan = mlan::MlanConfig::FromJson(merged(c.mlan.ToJson(), *s));
    if (const Json *s = r.Sub("tdnnf")) c.tdnnf = recognizer::TdnnfConfig::FromJson(merged(c.tdnnf.ToJson(), *s));
    if (const Json *s = r.Sub("conformer"))
      c.conformer = recognizer::ConformerConfig::FromJson(merged(c.conformer.ToJson(), *s));
    if (const Json *s = r.Sub("train_tdnnf"))
      c.train_tdnnf = recognizer::RecognizerTrainConfig::FromJson(merged(c.train_tdnnf.ToJson(), *s), "train_tdnnf");
    if (const Json *s = r.Sub("train_conformer"))
      c.train_conformer =
          recognizer::RecognizerTrainConfig::FromJson(merged(c.train_conformer.ToJson(), *s), "train_conformer");
    if (const Json *s = r.Sub("lhuc")) c.lhuc = recognizer::LhucConfig::FromJson(merged(c.lhuc.ToJson(), *s));
    if (const Json *s = r.Sub("lhuc_probe")) c.lhuc_probe = LhucProbeConfig::FromJson(*s);
    if (const Json *s = r.Sub("decode")) c.decode = recognizer::BeamConfig::FromJson(merged(c.decode.ToJson(), *s));
    if (const Json *s = r.Sub("ctc_decode"))
      c.ctc_decode = recognizer::BeamConfig::FromJson(merged(c.ctc_decode.ToJson(), *s));
    if (const Json *s = r.Sub("augment")) c.augment = featex::AugmentPolicy::FromJson(merged(c.augment.ToJson(), *s));
    r.Get("lambda_grid", c.lambda_grid).Get("mu_grid", c.mu_grid).Get("ablate_layers", c.ablate_layers);
    if (const Json *s = r.Sub("viz")) c.viz = VizConfig::FromJson(merged(c.viz.ToJson(), *s));
    r.Get("jobs", c.jobs);
    r.Finish();
    c.Validate();
    return c;
  }

  void Validate() const {
    if (domains.empty()) throw ConfigError("config.domains must not be empty");
    for (const auto &d : domains) {
      try {
        synth::ParseDomain(d);
      } catch (const Error &) {
        throw ConfigError("config.domains: unknown domain " + d);
      }
    }
    if (std::find(domains.begin(), domains.end(), "SRC") == domains.end())
      throw ConfigError("config.domains must include SRC");
    if (dct_kept == 0 || dct_kept > 64) throw ConfigError("config.dct_kept must be in 1..64");
    if (splice_context % 2 == 0) throw ConfigError("config.splice_context must be odd");
    if (inversion.output_dim != dct_kept * dct_kept)
      throw ConfigError("config.inversion.output_dim must equal dct_kept squared");
    if (mlan.context != splice_context) throw ConfigError("config.mlan.context must equal splice_context");
    for (const auto *grid : {&lambda_grid, &mu_grid}) {
      if (grid->empty()) throw ConfigError("config: interpolation grids must not be empty");
      for (double v : *grid)
        if (v < 0.0 || v > 1.0) throw ConfigError("config: interpolation weights must lie in [0, 1]");
    }
    for (std::size_t k : ablate_layers)
      if (k < 1 || k > tdnnf.blocks) throw ConfigError(StrCat("config.ablate_layers: layer ", k, " outside 1..", tdnnf.blocks));
    if (jobs == 0) throw ConfigError("config.jobs must be positive");
  }
};

}  // namespace a2a::cli
