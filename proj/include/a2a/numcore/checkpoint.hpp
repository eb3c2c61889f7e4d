// a2a/numcore/checkpoint.hpp

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

// Checkpoint layout (all integers little-endian):
//
//   "AINV"                 4 bytes magic
//   version                u32 (currently 1)
//   header_len             u64, byte length of the JSON header
//   header                 UTF-8 JSON: {"kind", "config", "params":[{name,rows,cols}], ...}
//   parameter blocks       rows*cols f64 each, row-major, in header order

#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "a2a/numcore/layer.hpp"

namespace a2a {

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace io {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

template <typename T>
void WritePod(std::ostream &os, T v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream &is) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is) throw Error("unexpected end of file");
  return v;
}

}  // namespace io

struct Checkpoint {
  std::string kind;      // model-kind tag, e.g. "TDNF"
  Json header;           // full header json
  std::vector<Matrix> blocks;
  std::vector<std::string> names;

  const Json &config() const { return header.at("config"); }
};

inline void WriteCheckpoint(const std::filesystem::path &path, const std::string &kind,
                            const Json &config, const ParamList &params, const Json &extra = {}) {
  Json header;
  header["kind"] = kind;
  header["config"] = config;
  Json plist = Json::array();
  for (const auto *p : params)
    plist.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  header["params"] = plist;
  if (!extra.is_null())
    for (auto it = extra.begin(); it != extra.end(); ++it) header[it.key()] = it.value();
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write checkpoint " + path.string());
  os.write("AINV", 4);
  io::WritePod<std::uint32_t>(os, kCheckpointVersion);
  io::WritePod<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto *p : params)
    os.write(reinterpret_cast<const char *>(p->value.data().data()),
             static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  if (!os) throw Error("failed writing checkpoint " + path.string());
}

inline Checkpoint ReadCheckpoint(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "AINV", 4) != 0) throw Error("bad checkpoint magic in " + path.string());
  const auto version = io::ReadPod<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw Error(StrCat("unsupported checkpoint version ", version));
  const auto len = io::ReadPod<std::uint64_t>(is);
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  Checkpoint ck;
  ck.header = Json::parse(text);
  ck.kind = ck.header.at("kind").get<std::string>();
  for (const auto &p : ck.header.at("params")) {
    Matrix m(p.at("rows").get<std::size_t>(), p.at("cols").get<std::size_t>());
    is.read(reinterpret_cast<char *>(m.data().data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw Error("truncated checkpoint " + path.string());
    ck.names.push_back(p.at("name").get<std::string>());
    ck.blocks.push_back(std::move(m));
  }
  return ck;
}

/// Copies checkpoint blocks into a freshly built model's parameters,
/// checking names and shapes position by position.
inline void RestoreParams(const Checkpoint &ck, const ParamList &params) {
  RequireShape(ck.blocks.size() == params.size(),
               StrCat("checkpoint has ", ck.blocks.size(), " params, model has ", params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    RequireShape(ck.names[i] == params[i]->name, "checkpoint param name mismatch: " + ck.names[i]);
    RequireShape(ck.blocks[i].SameShape(params[i]->value), "checkpoint param shape mismatch: " + ck.names[i]);
    params[i]->value = ck.blocks[i];
  }
}

inline void RequireKind(const Checkpoint &ck, const std::string &kind) {
  if (ck.kind != kind) throw Error("expected checkpoint kind " + kind + ", got " + ck.kind);
}

}  // namespace a2a
