// a2a/cli/pipeline.hpp

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

#include <functional>
#include <string>
#include <vector>

#include "a2a/cli/stages.hpp"

namespace a2a::cli {

/// A failure inside a named stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string &what)
      : Error("stage " + stage + " failed: " + what), stage_(std::move(stage)) {}
  const std::string &stage() const { return stage_; }

 private:
  std::string stage_;
};

struct StageDef {
  std::string name;
  std::function<void(Workspace &)> run;
};

/// Pipeline stages in execution order.
inline const std::vector<StageDef> &PipelineStages() {
  static const std::vector<StageDef> stages = {
      {"gen", StageGen},          {"featex", StageFeatex},         {"train-mlan", StageTrainMlan},
      {"train-inv", StageTrainInv}, {"invert", StageInvert},       {"train-asr", StageTrainAsr},
      {"adapt-lhuc", StageAdaptLhuc}, {"decode", StageDecode},     {"fuse", StageFuse},
      {"rescore", StageRescore},  {"score", StageScore},           {"viz", StageViz},
  };
  return stages;
}

inline bool IsPipelineStage(const std::string &name) {
  for (const auto &s : PipelineStages())
    if (s.name == name) return true;
  return false;
}

/// Runs one stage with manifest bookkeeping. ConfigError passes through
/// unchanged; anything else is tagged with the stage name.
inline RunManifest RunStage(Workspace &ws, const std::string &name, const std::function<void(Workspace &)> &fn) {
  ws.Begin(name);
  try {
    fn(ws);
    return ws.Finish();
  } catch (const ConfigError &) {
    throw;
  } catch (const StageError &) {
    throw;
  } catch (const std::exception &e) {
    throw StageError(name, e.what());
  }
}

inline RunManifest RunStage(Workspace &ws, const std::string &name) {
  for (const auto &s : PipelineStages())
    if (s.name == name) return RunStage(ws, name, s.run);
  throw ConfigError("unknown stage " + name);
}

/// Compact, deterministic table of the reported numbers, assembled from
/// whichever reports exist.
inline Json BuildSummary(Workspace &ws) {
  auto load = [&](const std::string &rel) -> Json { return ws.Exists(rel) ? ws.ReadJson(rel) : Json(); };
  Json s = Json::object();
  s["seed"] = ws.config().seed;
  s["config_hash"] = ConfigHash(ws.config());
  if (Json j = load("reports/score.json"); !j.is_null()) {
    s["wer"] = j["wer"];
    s["significance"] = j["significance"];
  }
  if (Json j = load("reports/mlan.json"); !j.is_null())
    for (const auto &[t, v] : j.items())
      s["mismatch"][t] = {{"raw_auc", v["raw"]["auc"]}, {"mlan_auc", v["mlan"]["auc"]}, {"auc_drop", v["auc_drop"]}};
  if (Json j = load("reports/inversion.json"); !j.is_null()) s["inversion_rmse"] = j;
  if (Json j = load("reports/train_asr.json"); !j.is_null())
    for (const auto &[k, v] : j.items())
      if (v.contains("max_semi_orth_defect")) s["semi_orth_defect"][k] = v["max_semi_orth_defect"];
  if (Json j = load("reports/lhuc.json"); !j.is_null() && j.contains("scaled_speaker"))
    s["lhuc_scaled_speaker"] = j["scaled_speaker"];
  if (Json j = load("reports/fuse.json"); !j.is_null())
    for (const auto &[d, v] : j.items())
      s["fuse"][d] = {{"best_lambda", v["best_lambda"]}, {"best_dev_wer", v["best_dev_wer"]},
                      {"boundary_exact", v["boundary_exact"]}};
  if (Json j = load("reports/rescore.json"); !j.is_null())
    for (const auto &[d, v] : j.items())
      s["rescore"][d] = {{"best_mu", v["best_mu"]}, {"best_dev_wer", v["best_dev_wer"]},
                         {"best_single_dev_wer", v["best_single_dev_wer"]}};
  if (Json j = load("reports/viz.json"); !j.is_null())
    for (const auto &[d, v] : j.items()) s["silhouette"][d] = v["silhouette"];
  return s;
}

inline void WriteSummary(Workspace &ws) { ws.WriteJson("summary.json", BuildSummary(ws)); }

struct PipelineResult {
  std::vector<RunManifest> manifests;
  Json summary;
  Json timing;
};

/// Runs the stages from `from` (default: the first) to the end, then the
/// summary; per-stage wall times go to timing.json.
inline PipelineResult RunPipeline(Workspace &ws, const std::string &from = "") {
  if (!from.empty() && !IsPipelineStage(from)) throw ConfigError("unknown stage " + from);
  PipelineResult res;
  bool started = from.empty();
  double total = 0.0;
  res.timing = Json::object();
  for (const auto &s : PipelineStages()) {
    if (!started && s.name != from) continue;
    started = true;
    Log("== " + s.name);
    res.manifests.push_back(RunStage(ws, s.name, s.run));
    res.timing["stages"][s.name] = res.manifests.back().wall_seconds;
    total += res.manifests.back().wall_seconds;
  }
  res.manifests.push_back(RunStage(ws, "summary", WriteSummary));
  res.summary = ReadJsonFile(ws.Path("summary.json"));
  res.timing["total_seconds"] = total;
  WriteJsonFile(ws.Path("timing.json"), res.timing);
  return res;
}

/// Opens an output directory for a validated config and stores the
/// resolved config next to the artifacts.
inline Workspace OpenWorkspace(const fs::path &out, const RunConfig &cfg) {
  fs::create_directories(out);
  WriteJsonFile(out / "config.json", cfg.ToJson());
  return Workspace(out, cfg);
}

}  // namespace a2a::cli
