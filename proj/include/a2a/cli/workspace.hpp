// a2a/cli/workspace.hpp

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

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "a2a/cli/run_config.hpp"
#include "a2a/synth/fseq.hpp"

namespace a2a::cli {

namespace fs = std::filesystem;

/// Lowercase hex SHA-256 of a byte string.
inline std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

inline std::string ReadFileBytes(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline std::string Sha256File(const fs::path &p) { return Sha256Hex(ReadFileBytes(p)); }

inline std::string ConfigHash(const RunConfig &c) { return Sha256Hex(c.ToJson().dump()); }

inline void WriteJsonFile(const fs::path &p, const Json &j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  os << j.dump(1) << "\n";
  if (!os) throw Error("failed writing " + p.string());
}

inline Json ReadJsonFile(const fs::path &p) {
  std::ifstream is(p);
  if (!is) throw Error("cannot open " + p.string());
  return Json::parse(is);
}

/// Provenance record written by every subcommand.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string stage;
  std::string config_hash;
  Json config;
  std::map<std::string, std::string> inputs;   // relative path -> sha256
  std::map<std::string, std::string> outputs;  // relative path -> sha256
  double wall_seconds = 0.0;

  Json ToJson() const {
    return {{"tool_version", tool_version}, {"stage", stage},     {"config_hash", config_hash},
            {"config", config},             {"inputs", inputs},   {"outputs", outputs},
            {"wall_seconds", wall_seconds}};
  }
  static RunManifest FromJson(const Json &j) {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.stage = j.at("stage").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.at("config");
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    return m;
  }
};

/// Output directory of a run. Stages read and write through it so every
/// file they touch lands in that stage's manifest.
class Workspace {
 public:
  Workspace(fs::path root, RunConfig cfg) : root_(std::move(root)), cfg_(std::move(cfg)) {}

  const fs::path &root() const { return root_; }
  const RunConfig &config() const { return cfg_; }

  fs::path Path(const std::string &rel) const { return root_ / rel; }
  bool Exists(const std::string &rel) const { return fs::exists(Path(rel)); }

  /// Starts a stage: clears the file sets and the clock.
  void Begin(const std::string &stage) {
    stage_ = stage;
    inputs_.clear();
    outputs_.clear();
    t0_ = std::chrono::steady_clock::now();
  }

  /// Marks a file as read by the current stage and returns its full path.
  fs::path In(const std::string &rel) {
    const fs::path p = Path(rel);
    if (!fs::exists(p)) throw Error(StrCat(stage_, ": missing input ", p.string(), " (run the earlier stage first)"));
    inputs_.insert(rel);
    return p;
  }

  /// Marks a file as written by the current stage and returns its full path,
  /// creating parent directories.
  fs::path Out(const std::string &rel) {
    const fs::path p = Path(rel);
    fs::create_directories(p.parent_path());
    outputs_.insert(rel);
    return p;
  }

  Matrix ReadMatrix(const std::string &rel) { return ReadFeatures(In(rel)); }
  void WriteMatrix(const std::string &rel, const Matrix &m) { WriteFeatures(Out(rel), m); }
  Json ReadJson(const std::string &rel) { return ReadJsonFile(In(rel)); }
  void WriteJson(const std::string &rel, const Json &j) { WriteJsonFile(Out(rel), j); }

  /// Registers every file already written under `dir` as an output.
  void OutTree(const std::string &dir) {
    for (const auto &e : fs::recursive_directory_iterator(Path(dir)))
      if (e.is_regular_file()) outputs_.insert(fs::relative(e.path(), root_).generic_string());
  }
  void InTree(const std::string &dir) {
    if (!fs::exists(Path(dir))) throw Error(StrCat(stage_, ": missing input directory ", Path(dir).string()));
    for (const auto &e : fs::recursive_directory_iterator(Path(dir)))
      if (e.is_regular_file()) inputs_.insert(fs::relative(e.path(), root_).generic_string());
  }

  /// Hashes everything the stage touched and writes manifests/<stage>.json.
  RunManifest Finish() {
    RunManifest m;
    m.stage = stage_;
    m.config = cfg_.ToJson();
    m.config_hash = Sha256Hex(m.config.dump());
    for (const auto &rel : inputs_) m.inputs[rel] = Sha256File(Path(rel));
    for (const auto &rel : outputs_) m.outputs[rel] = Sha256File(Path(rel));
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    WriteJsonFile(Path("manifests/" + stage_ + ".json"), m.ToJson());
    return m;
  }

 private:
  fs::path root_;
  RunConfig cfg_;
  std::string stage_;
  std::set<std::string> inputs_, outputs_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace a2a::cli
