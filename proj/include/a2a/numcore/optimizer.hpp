// a2a/numcore/optimizer.hpp

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

#include "a2a/numcore/layer.hpp"

namespace a2a {

struct OptimizerConfig {
  enum class Kind { kSgd, kAdam };
  Kind kind = Kind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Per-element gradient clip; 0 disables.
  double clip = 0.0;
};

inline Json ToJson(const OptimizerConfig &c) {
  return {{"kind", c.kind == OptimizerConfig::Kind::kAdam ? "adam" : "sgd"},
          {"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}, {"clip", c.clip}};
}

/// SGD or Adam over a fixed parameter list. A parameter whose gradient is
/// entirely zero is skipped, moments included, so it stays bit-identical.
class Optimizer {
 public:
  Optimizer(ParamList params, OptimizerConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    for (auto *p : params_) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
      t_.push_back(0);
    }
  }

  const OptimizerConfig &config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }
  long steps() const { return steps_; }

  void Step() {
    ++steps_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Param &p = *params_[i];
      if (!p.trainable) continue;
      auto &g = p.grad.data();
      bool any = false;
      for (double x : g)
        if (x != 0.0) {
          any = true;
          break;
        }
      if (!any) continue;
      if (cfg_.clip > 0)
        for (double &x : g) x = std::clamp(x, -cfg_.clip, cfg_.clip);
      auto &w = p.value.data();
      if (cfg_.kind == OptimizerConfig::Kind::kSgd) {
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= cfg_.lr * g[j];
        continue;
      }
      const long t = ++t_[i];
      const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t));
      auto &m = m_[i].data();
      auto &v = v_[i].data();
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
        w[j] -= cfg_.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.eps);
      }
    }
  }

 private:
  ParamList params_;
  OptimizerConfig cfg_;
  std::vector<Matrix> m_, v_;
  std::vector<long> t_;
  long steps_ = 0;
};

}  // namespace a2a
