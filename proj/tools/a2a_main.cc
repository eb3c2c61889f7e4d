// a2a/tools/a2a_main.cc

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

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "a2a/cli/pipeline.hpp"

namespace {

using a2a::ConfigError;
using a2a::Json;
using namespace a2a::cli;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Flags {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";
  std::size_t jobs = 0;
  std::string stage;
  std::vector<std::size_t> layers;
};

RunConfig ResolveConfig(const Flags &f) {
  Json j = Json::object();
  if (!f.config_path.empty()) {
    std::ifstream is(f.config_path);
    if (!is) throw ConfigError("cannot open config " + f.config_path);
    try {
      j = Json::parse(is);
    } catch (const Json::parse_error &e) {
      throw ConfigError("config " + f.config_path + " is not valid JSON: " + e.what());
    }
  }
  if (f.seed_set) j["seed"] = f.seed;
  if (f.jobs) j["jobs"] = f.jobs;
  try {
    return RunConfig::FromJson(j);
  } catch (const ConfigError &) {
    throw;
  } catch (const Json::exception &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Articulatory inversion and fusion ASR laboratory"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);
  Flags f;
  app.add_option("--config", f.config_path, "JSON run config (defaults are used for missing keys)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t &s) { f.seed = s, f.seed_set = true; }, "global seed, overrides the config");
  app.add_option("--out", f.out, "output directory")->capture_default_str();
  app.add_option("--jobs", f.jobs, "worker cap for parallel stages")->check(CLI::PositiveNumber);
  app.add_option("--stage", f.stage, "pipeline: resume from this stage");

  struct Cmd {
    const char *name;
    const char *help;
  };
  const std::vector<Cmd> stage_cmds = {
      {"gen", "generate the synthetic corpus"},
      {"featex", "articulatory features from rendered ultrasound"},
      {"train-mlan", "train the MLAN per target domain and report mismatch"},
      {"train-inv", "train the inversion models"},
      {"invert", "invert every utterance and report RMSE"},
      {"train-asr", "train the recognizers and bigram LMs"},
      {"adapt-lhuc", "LHUC speaker adaptation"},
      {"decode", "N-best decoding of every system"},
      {"fuse", "frame-level score fusion"},
      {"rescore", "conformer second-pass rescoring"},
      {"score", "WER and significance"},
      {"viz", "t-SNE plots and silhouettes"},
  };
  std::vector<CLI::App *> subs;
  for (const auto &c : stage_cmds) subs.push_back(app.add_subcommand(c.name, c.help));
  CLI::App *pipeline = app.add_subcommand("pipeline", "run every stage in order");
  CLI::App *ablate = app.add_subcommand("ablate", "fusion layer sweep ranked by dev WER");
  ablate->add_option("--layers", f.layers, "fusion layers to try (default: config ablate_layers)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitConfig;
  }

  RunConfig cfg;
  try {
    cfg = ResolveConfig(f);
    if (!f.stage.empty() && !IsPipelineStage(f.stage)) throw ConfigError("unknown stage " + f.stage);
    for (std::size_t k : f.layers)
      if (k < 1 || k > cfg.tdnnf.blocks) throw ConfigError(a2a::StrCat("ablate: layer ", k, " outside 1..", cfg.tdnnf.blocks));
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  }
  a2a::MaxJobs() = cfg.jobs;

  try {
    Workspace ws = OpenWorkspace(f.out, cfg);
    if (pipeline->parsed()) {
      const PipelineResult r = RunPipeline(ws, f.stage);
      std::cout << r.summary.dump(1) << std::endl;
      return kExitOk;
    }
    if (ablate->parsed()) {
      const auto layers = f.layers.empty() ? cfg.ablate_layers : f.layers;
      Json rep;
      RunStage(ws, "ablate", [&](Workspace &w) { rep = RunAblation(w, layers); });
      std::cout << rep.dump(1) << std::endl;
      return kExitOk;
    }
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) {
        const RunManifest m = RunStage(ws, stage_cmds[i].name);
        RunStage(ws, "summary", WriteSummary);
        std::cout << "wrote " << m.outputs.size() << " files in " << m.wall_seconds << " s" << std::endl;
      }
    return kExitOk;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const std::exception &e) {
    std::cerr << e.what() << std::endl;
    return kExitRuntime;
  }
}
