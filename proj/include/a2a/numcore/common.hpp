// a2a/numcore/common.hpp

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

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace a2a {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string &what) : Error(what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string &what) : Error(what) {}
};

inline void Require(bool cond, const std::string &msg) {
  if (!cond) throw Error(msg);
}

inline void RequireShape(bool cond, const std::string &msg) {
  if (!cond) throw ShapeError(msg);
}

template <typename... Args>
std::string StrCat(const Args &...args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

/// Lengths of the independent sequences packed row-wise into one matrix.
/// Time-aware layers never look across a segment boundary.
struct SeqLayout {
  std::vector<std::size_t> lengths;

  SeqLayout() = default;
  explicit SeqLayout(std::vector<std::size_t> l) : lengths(std::move(l)) {}
  static SeqLayout Single(std::size_t t) { return SeqLayout({t}); }

  std::size_t Total() const {
    return std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
  }
  std::size_t NumSeqs() const { return lengths.size(); }
  std::vector<std::size_t> Offsets() const {
    std::vector<std::size_t> off(lengths.size(), 0);
    for (std::size_t i = 1; i < lengths.size(); ++i)
      off[i] = off[i - 1] + lengths[i - 1];
    return off;
  }
  bool operator==(const SeqLayout &o) const { return lengths == o.lengths; }
};

}  // namespace a2a
