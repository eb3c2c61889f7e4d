// a2a/synth/fseq.hpp

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

// Feature file: "FSEQ", u32 version, u32 rows, u32 cols, then rows*cols
// little-endian f32, row-major. Label files share the header and carry u32
// ids with cols = 1.

#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "a2a/numcore/checkpoint.hpp"
#include "a2a/numcore/matrix.hpp"

namespace a2a {

inline constexpr std::uint32_t kFseqVersion = 1;

/// Time-major per-frame features tagged with what they are.
struct FeatureSequence {
  std::string kind;
  Matrix frames;

  std::size_t num_frames() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }
};

namespace fseq_detail {

inline void WriteHeader(std::ofstream &os, std::size_t rows, std::size_t cols) {
  os.write("FSEQ", 4);
  io::WritePod<std::uint32_t>(os, kFseqVersion);
  io::WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(rows));
  io::WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(cols));
}

inline std::pair<std::size_t, std::size_t> ReadHeader(std::ifstream &is, const std::filesystem::path &p) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "FSEQ", 4) != 0) throw Error("bad FSEQ magic in " + p.string());
  if (io::ReadPod<std::uint32_t>(is) != kFseqVersion) throw Error("unsupported FSEQ version in " + p.string());
  const auto rows = io::ReadPod<std::uint32_t>(is);
  const auto cols = io::ReadPod<std::uint32_t>(is);
  return {rows, cols};
}

}  // namespace fseq_detail

inline void WriteFeatures(const std::filesystem::path &path, const Matrix &m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  fseq_detail::WriteHeader(os, m.rows(), m.cols());
  std::vector<float> buf(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) buf[i] = static_cast<float>(m.data()[i]);
  os.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!os) throw Error("failed writing " + path.string());
}

inline Matrix ReadFeatures(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  const auto [rows, cols] = fseq_detail::ReadHeader(is, path);
  std::vector<float> buf(rows * cols);
  is.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!is) throw Error("truncated " + path.string());
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < buf.size(); ++i) m.data()[i] = buf[i];
  return m;
}

inline void WriteLabels(const std::filesystem::path &path, const std::vector<int> &labels) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  fseq_detail::WriteHeader(os, labels.size(), 1);
  for (int l : labels) io::WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(l));
  if (!os) throw Error("failed writing " + path.string());
}

inline std::vector<int> ReadLabels(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  const auto [rows, cols] = fseq_detail::ReadHeader(is, path);
  if (cols != 1) throw Error("label file must have one column: " + path.string());
  std::vector<int> out(rows);
  for (auto &l : out) l = static_cast<int>(io::ReadPod<std::uint32_t>(is));
  return out;
}

/// Rounds every entry through f32, matching what a write/read cycle yields.
inline Matrix QuantizeF32(Matrix m) {
  for (auto &x : m.data()) x = static_cast<double>(static_cast<float>(x));
  return m;
}

}  // namespace a2a
