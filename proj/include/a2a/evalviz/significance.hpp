// a2a/evalviz/significance.hpp

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
#include <limits>
#include <vector>

#include "a2a/numcore/common.hpp"
#include "a2a/numcore/layer.hpp"

namespace a2a::evalviz {

struct SignificanceResult {
  std::vector<double> diffs;
  double mean = 0.0;
  double sd = 0.0;
  double z = 0.0;
  double p = 1.0;
  bool significant = false;
  double alpha = 0.05;

  Json ToJson() const {
    auto num = [](double v) -> Json {
      if (std::isfinite(v)) return v;
      return v > 0 ? "inf" : "-inf";
    };
    return {{"n", diffs.size()}, {"mean", mean}, {"sd", sd}, {"z", num(z)}, {"p", p}, {"significant", significant},
            {"alpha", alpha}};
  }
};

/// Matched-pairs z test on per-utterance error count differences
/// d_i = a_i - b_i, with z = mean / (sd / sqrt(n)) and a two-sided normal p.
/// Zero variance gives z = 0 (p = 1) for zero mean and z = +-inf (p = 0)
/// otherwise.
inline SignificanceResult Mapsswe(const std::vector<double> &errors_a, const std::vector<double> &errors_b,
                                  double alpha = 0.05) {
  RequireShape(errors_a.size() == errors_b.size(), "mapsswe: utterance lists differ in length");
  Require(errors_a.size() >= 2, "mapsswe: need at least two utterances");
  SignificanceResult r;
  r.alpha = alpha;
  const auto n = static_cast<double>(errors_a.size());
  for (std::size_t i = 0; i < errors_a.size(); ++i) r.diffs.push_back(errors_a[i] - errors_b[i]);
  double s = 0.0;
  for (double d : r.diffs) s += d;
  r.mean = s / n;
  double ss = 0.0;
  for (double d : r.diffs) ss += (d - r.mean) * (d - r.mean);
  r.sd = std::sqrt(ss / (n - 1.0));
  if (r.sd == 0.0) {
    r.z = r.mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.mean);
  } else {
    r.z = r.mean / (r.sd / std::sqrt(n));
  }
  r.p = std::erfc(std::abs(r.z) / std::sqrt(2.0));
  r.significant = r.p < alpha;
  return r;
}

}  // namespace a2a::evalviz
