// a2a/numcore/gradcheck.hpp

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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "a2a/numcore/stack.hpp"

namespace a2a {

struct GradCheckEntry {
  std::string name;  // parameter name, or "input"
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;

  double MaxError() const {
    double m = 0.0;
    for (const auto &e : entries) m = std::max(m, e.max_rel_error);
    return m;
  }
  bool Passed() const { return MaxError() < tolerance; }
};

struct GradCheckOptions {
  double step = 1e-6;
  /// Denominator floor: |a - n| / max(|a|, |n|, floor).
  double floor = 1e-3;
  /// Elements probed per parameter; 0 probes all of them.
  std::size_t max_per_param = 0;
  std::uint64_t seed = 7;
};

inline double RelativeError(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares backprop gradients of a stack ending in a LossLayer against
/// central differences, for every parameter and for the input.
inline GradCheckReport GradCheck(LayerStack &stack, const Matrix &input, const SeqLayout &layout,
                                 double tolerance, const GradCheckOptions &opt = {}) {
  LossLayer *loss = stack.loss_layer();
  Require(loss != nullptr, "GradCheck: stack must end in a loss layer");
  ParamList params = stack.Params();
  auto eval = [&](const Matrix &x) {
    stack.Forward(x, layout);
    return loss->Loss();
  };

  ZeroGrads(params);
  stack.Forward(input, layout);
  const Matrix dinput = stack.Backward(Matrix(1, 1, 1.0));

  GradCheckReport report;
  report.tolerance = tolerance;
  Rng rng(opt.seed);
  auto pick = [&](std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (opt.max_per_param && n > opt.max_per_param) {
      rng.Shuffle(idx);
      idx.resize(opt.max_per_param);
      std::sort(idx.begin(), idx.end());
    }
    return idx;
  };

  for (auto *p : params) {
    GradCheckEntry e{p->name, 0.0, 0};
    for (std::size_t i : pick(p->value.size())) {
      double &w = p->value.data()[i];
      const double saved = w;
      w = saved + opt.step;
      const double up = eval(input);
      w = saved - opt.step;
      const double down = eval(input);
      w = saved;
      const double numeric = (up - down) / (2.0 * opt.step);
      e.max_rel_error = std::max(e.max_rel_error, RelativeError(p->grad.data()[i], numeric, opt.floor));
      ++e.checked;
    }
    report.entries.push_back(e);
  }

  GradCheckEntry in_entry{"input", 0.0, 0};
  Matrix x = input;
  for (std::size_t i : pick(x.size())) {
    const double saved = x.data()[i];
    x.data()[i] = saved + opt.step;
    const double up = eval(x);
    x.data()[i] = saved - opt.step;
    const double down = eval(x);
    x.data()[i] = saved;
    const double numeric = (up - down) / (2.0 * opt.step);
    in_entry.max_rel_error = std::max(in_entry.max_rel_error, RelativeError(dinput.data()[i], numeric, opt.floor));
    ++in_entry.checked;
  }
  report.entries.push_back(in_entry);
  return report;
}

inline GradCheckReport GradCheck(LayerStack &stack, const Matrix &input, double tolerance,
                                 const GradCheckOptions &opt = {}) {
  return GradCheck(stack, input, SeqLayout::Single(input.rows()), tolerance, opt);
}

}  // namespace a2a
