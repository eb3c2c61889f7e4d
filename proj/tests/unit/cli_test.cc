// a2a/tests/unit/cli_test.cc

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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "a2a/cli/pipeline.hpp"

namespace a2a::cli {
namespace {

Json TinyJson() { return ReadJsonFile(fs::path(A2A_TEST_DATA_DIR) / "data/tiny_config.json"); }

fs::path FreshDir(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

int RunTool(const std::string &args) {
  const int status = std::system((std::string(A2A_TOOL_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Sha256Test, StandardVectors) {
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(RunConfigTest, DefaultsRoundTrip) {
  const RunConfig a;
  const RunConfig b = RunConfig::FromJson(a.ToJson());
  EXPECT_EQ(a.ToJson(), b.ToJson());
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  EXPECT_EQ(RunConfig::FromJson(Json::object()).ToJson(), a.ToJson());
}

TEST(RunConfigTest, PartialOverrideKeepsSiblings) {
  const RunConfig c = RunConfig::FromJson({{"tdnnf", {{"fusion", {{"layer", 2}}}}}, {"seed", 9}});
  EXPECT_EQ(c.tdnnf.fusion.layer, 2u);
  EXPECT_EQ(c.tdnnf.hidden, RunConfig().tdnnf.hidden);
  EXPECT_EQ(c.tdnnf.fusion.subnet_hidden, RunConfig().tdnnf.fusion.subnet_hidden);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_NE(ConfigHash(c), ConfigHash(RunConfig()));
}

TEST(RunConfigTest, UnknownKeysRejectedAtAnyDepth) {
  EXPECT_THROW(RunConfig::FromJson({{"sede", 1}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"tdnnf", {{"hiden", 3}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"mlan", {{"level2", {{"hidden", {8}}, {"x", 1}}}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"viz", {{"tsne", {{"theta", 0.5}}}}}}), ConfigError);
}

TEST(RunConfigTest, InvalidValuesRejected) {
  EXPECT_THROW(RunConfig::FromJson({{"domains", {"TGT_A"}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"domains", {"SRC", "TGT_C"}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"lambda_grid", {0.5, 1.5}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"ablate_layers", {0}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"dct_kept", 10}}), ConfigError);  // inversion output stays 144
  EXPECT_THROW(RunConfig::FromJson({{"jobs", 0}}), ConfigError);
  EXPECT_NO_THROW(RunConfig::FromJson({{"dct_kept", 10}, {"inversion", {{"output_dim", 100}}}}));
}

TEST(WorkspaceTest, ManifestListsHashedInputsAndOutputs) {
  const fs::path dir = FreshDir("a2a_ws_test");
  Workspace ws = OpenWorkspace(dir, RunConfig());
  ws.Begin("demo");
  ws.WriteJson("reports/a.json", {{"x", 1}});
  EXPECT_THROW(ws.In("missing.txt"), Error);
  const RunManifest m = ws.Finish();
  ASSERT_EQ(m.outputs.size(), 1u);
  EXPECT_EQ(m.outputs.at("reports/a.json"), Sha256File(dir / "reports/a.json"));
  EXPECT_EQ(m.config_hash, ConfigHash(RunConfig()));
  const RunManifest back = RunManifest::FromJson(ReadJsonFile(dir / "manifests/demo.json"));
  EXPECT_EQ(back.outputs, m.outputs);
  EXPECT_EQ(back.tool_version, kToolVersion);

  ws.Begin("reader");
  ws.ReadJson("reports/a.json");
  EXPECT_EQ(ws.Finish().inputs.size(), 1u);
  fs::remove_all(dir);
}

TEST(ToolTest, ConfigErrorsExitTwoWithoutOutputs) {
  const fs::path dir = FreshDir("a2a_tool_cfg");
  const fs::path cfg = fs::temp_directory_path() / "a2a_bad_config.json";
  WriteJsonFile(cfg, {{"tdnnf", {{"layers", 3}}}});
  EXPECT_EQ(RunTool("pipeline --config " + cfg.string() + " --out " + dir.string()), 2);
  EXPECT_FALSE(fs::exists(dir));
  std::ofstream(cfg) << "{ not json";
  EXPECT_EQ(RunTool("gen --config " + cfg.string() + " --out " + dir.string()), 2);
  EXPECT_EQ(RunTool("pipeline --stage nope --out " + dir.string()), 2);
  EXPECT_EQ(RunTool("ablate --layers 9 --out " + dir.string()), 2);
  EXPECT_EQ(RunTool("no-such-command"), 2);
  EXPECT_FALSE(fs::exists(dir));
  fs::remove(cfg);
}

TEST(ToolTest, MissingInputsAreRuntimeFailures) {
  const fs::path dir = FreshDir("a2a_tool_missing");
  EXPECT_EQ(RunTool("decode --out " + dir.string()), 1);
  fs::remove_all(dir);
}

// One tiny end-to-end run shared by the tests below.
struct TinyRun {
  fs::path dir;
  PipelineResult result;
};

const TinyRun &Tiny() {
  static const TinyRun run = [] {
    TinyRun r;
    r.dir = FreshDir("a2a_tiny_a");
    Workspace ws = OpenWorkspace(r.dir, RunConfig::FromJson(TinyJson()));
    r.result = RunPipeline(ws);
    return r;
  }();
  return run;
}

TEST(PipelineTest, TinyRunProducesEveryReport) {
  const auto &r = Tiny();
  for (const char *rel : {"summary.json", "timing.json", "config.json", "reports/score.json", "reports/viz.json",
                          "reports/mlan.json", "reports/fuse.json", "reports/rescore.json", "viz/SRC_oracle.svg",
                          "viz/TGT_A_inv_mlan.csv", "nbest/TGT_B.2pass/eval.txt", "nbest/TGT_A.aasr_mlan_lhuc/dev.txt"})
    EXPECT_TRUE(fs::exists(r.dir / rel)) << rel;
  EXPECT_EQ(r.result.manifests.size(), PipelineStages().size() + 1);
  for (const auto &s : PipelineStages()) EXPECT_TRUE(fs::exists(r.dir / "manifests" / (s.name + ".json"))) << s.name;
  const Json &s = r.result.summary;
  EXPECT_TRUE(s["wer"].contains("SRC.asr"));
  EXPECT_TRUE(s["fuse"]["SRC"]["boundary_exact"].get<bool>());
  EXPECT_TRUE(s["lhuc_scaled_speaker"]["zero_alpha_bit_exact"].get<bool>());
  // every stage output is listed, and every file on disk is reachable
  std::set<std::string> listed;
  for (const auto &m : r.result.manifests)
    for (const auto &[rel, h] : m.outputs) listed.insert(rel);
  for (const auto &e : fs::recursive_directory_iterator(r.dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), r.dir).generic_string();
    if (rel.rfind("manifests/", 0) == 0 || rel == "config.json" || rel == "timing.json") continue;
    EXPECT_TRUE(listed.count(rel)) << rel;
  }
}

TEST(PipelineTest, RerunAndResumeAreBitIdentical) {
  const auto &a = Tiny();
  const fs::path dir = FreshDir("a2a_tiny_b");
  Workspace ws = OpenWorkspace(dir, RunConfig::FromJson(TinyJson()));
  const PipelineResult b = RunPipeline(ws);
  EXPECT_EQ(ReadFileBytes(a.dir / "summary.json"), ReadFileBytes(dir / "summary.json"));
  ASSERT_EQ(a.result.manifests.size(), b.manifests.size());
  for (std::size_t i = 0; i < b.manifests.size(); ++i)
    EXPECT_EQ(a.result.manifests[i].outputs, b.manifests[i].outputs) << b.manifests[i].stage;

  // delete downstream outputs and resume from decode
  fs::remove_all(dir / "nbest");
  fs::remove(dir / "summary.json");
  const PipelineResult c = RunPipeline(ws, "decode");
  EXPECT_EQ(ReadFileBytes(a.dir / "summary.json"), ReadFileBytes(dir / "summary.json"));
  EXPECT_EQ(c.manifests.front().stage, "decode");
  fs::remove_all(dir);
}

TEST(PipelineTest, AblationDeduplicatesAndRanks) {
  const auto &a = Tiny();
  Workspace ws(a.dir, RunConfig::FromJson(TinyJson()));
  Json rep;
  RunStage(ws, "ablate", [&](Workspace &w) { rep = RunAblation(w, {2, 2, 1}); });
  const Json &rows = rep["rows"];
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LE(rows[0]["dev_wer"].get<double>(), rows[1]["dev_wer"].get<double>());
  std::set<std::size_t> layers{rows[0]["layer"].get<std::size_t>(), rows[1]["layer"].get<std::size_t>()};
  EXPECT_EQ(layers, (std::set<std::size_t>{1, 2}));
  RunStage(ws, "ablate", [&](Workspace &w) { rep = RunAblation(w, {2}); });
  EXPECT_EQ(rep["rows"].size(), 1u);
  EXPECT_THROW(RunAblation(ws, {3}), ConfigError);
}

TEST(PipelineTest, UnknownResumeStageRejected) {
  Workspace ws(FreshDir("a2a_unused"), RunConfig());
  EXPECT_THROW(RunPipeline(ws, "train"), ConfigError);
}

}  // namespace
}  // namespace a2a::cli
