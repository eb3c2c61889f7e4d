// a2a/featex/norm.hpp

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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "a2a/numcore/layer.hpp"

namespace a2a::featex {

inline constexpr double kSdFloor = 1e-8;

/// Per-dimension mean and standard deviation from a declared split.
struct NormStats {
  std::vector<double> means;
  std::vector<double> sds;
  std::string source;  // split id the stats came from

  std::size_t dims() const { return means.size(); }

  /// Population statistics over every frame of every sequence.
  static NormStats Compute(const std::vector<const Matrix *> &seqs, std::string source) {
    Require(!seqs.empty(), "NormStats::Compute: no sequences");
    const std::size_t d = seqs.front()->cols();
    std::vector<long double> sum(d, 0.0L);
    std::size_t n = 0;
    for (const Matrix *m : seqs) {
      RequireShape(m->cols() == d, "NormStats::Compute: dimension mismatch");
      for (std::size_t t = 0; t < m->rows(); ++t)
        for (std::size_t j = 0; j < d; ++j) sum[j] += (*m)(t, j);
      n += m->rows();
    }
    Require(n > 0, "NormStats::Compute: no frames");
    NormStats s;
    s.source = std::move(source);
    s.means.resize(d);
    for (std::size_t j = 0; j < d; ++j) s.means[j] = static_cast<double>(sum[j] / static_cast<long double>(n));
    std::vector<long double> sq(d, 0.0L);
    for (const Matrix *m : seqs)
      for (std::size_t t = 0; t < m->rows(); ++t)
        for (std::size_t j = 0; j < d; ++j) {
          const long double x = (*m)(t, j) - s.means[j];
          sq[j] += x * x;
        }
    s.sds.resize(d);
    for (std::size_t j = 0; j < d; ++j)
      s.sds[j] = std::max(kSdFloor, static_cast<double>(std::sqrt(sq[j] / static_cast<long double>(n))));
    return s;
  }

  static NormStats Compute(const std::vector<Matrix> &seqs, std::string source) {
    std::vector<const Matrix *> p;
    for (const auto &m : seqs) p.push_back(&m);
    return Compute(p, std::move(source));
  }

  Matrix Apply(const Matrix &m) const {
    RequireShape(m.cols() == dims(), StrCat("NormStats::Apply: expected dim ", dims(), ", got ", m.cols()));
    Matrix out = m;
    for (std::size_t t = 0; t < m.rows(); ++t)
      for (std::size_t j = 0; j < dims(); ++j) out(t, j) = (m(t, j) - means[j]) / sds[j];
    return out;
  }

  Matrix Invert(const Matrix &m) const {
    RequireShape(m.cols() == dims(), "NormStats::Invert: dimension mismatch");
    Matrix out = m;
    for (std::size_t t = 0; t < m.rows(); ++t)
      for (std::size_t j = 0; j < dims(); ++j) out(t, j) = m(t, j) * sds[j] + means[j];
    return out;
  }

  Json ToJson() const { return {{"dims", dims()}, {"means", means}, {"sds", sds}, {"source", source}}; }

  static NormStats FromJson(const Json &j) {
    NormStats s;
    s.means = j.at("means").get<std::vector<double>>();
    s.sds = j.at("sds").get<std::vector<double>>();
    s.source = j.at("source").get<std::string>();
    if (j.at("dims").get<std::size_t>() != s.means.size() || s.sds.size() != s.means.size())
      throw Error("NormStats: inconsistent dims");
    return s;
  }

  void Save(const std::filesystem::path &p) const {
    std::ofstream os(p);
    if (!os) throw Error("cannot write " + p.string());
    os << ToJson().dump() << "\n";
  }

  static NormStats Load(const std::filesystem::path &p) {
    std::ifstream is(p);
    if (!is) throw Error("cannot open " + p.string());
    return FromJson(Json::parse(is));
  }
};

}  // namespace a2a::featex
