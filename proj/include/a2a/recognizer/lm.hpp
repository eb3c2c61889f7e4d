// a2a/recognizer/lm.hpp

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
#include <vector>

#include "a2a/numcore/layer.hpp"

namespace a2a::recognizer {

/// Token bigram with add-one smoothing. Index `num_tokens` is the sentence
/// boundary, used both as history at the start and as the final event.
class BigramLm {
 public:
  BigramLm() = default;
  explicit BigramLm(std::size_t num_tokens) : n_(num_tokens), logp_(num_tokens + 1, num_tokens + 1) {
    Estimate({});
  }

  static BigramLm Train(std::size_t num_tokens, const std::vector<std::vector<int>> &transcripts) {
    BigramLm lm;
    lm.n_ = num_tokens;
    lm.logp_ = Matrix(num_tokens + 1, num_tokens + 1);
    lm.Estimate(transcripts);
    return lm;
  }

  std::size_t num_tokens() const { return n_; }
  int boundary() const { return static_cast<int>(n_); }

  /// log P(next | prev); prev or next may be boundary().
  double LogProb(int prev, int next) const {
    return logp_(static_cast<std::size_t>(prev), static_cast<std::size_t>(next));
  }

  /// Total log probability of a sequence including both boundaries.
  double Score(const std::vector<int> &seq) const {
    int prev = boundary();
    double s = 0.0;
    for (int t : seq) {
      s += LogProb(prev, t);
      prev = t;
    }
    return s + LogProb(prev, boundary());
  }

  Json ToJson() const {
    Json rows = Json::array();
    for (std::size_t r = 0; r < logp_.rows(); ++r)
      rows.push_back(std::vector<double>(logp_.Row(r).begin(), logp_.Row(r).end()));
    return {{"num_tokens", n_}, {"logp", rows}};
  }
  static BigramLm FromJson(const Json &j) {
    BigramLm lm;
    lm.n_ = j.at("num_tokens").get<std::size_t>();
    lm.logp_ = Matrix(lm.n_ + 1, lm.n_ + 1);
    const auto &rows = j.at("logp");
    RequireShape(rows.size() == lm.n_ + 1, "BigramLm: bad table");
    for (std::size_t r = 0; r <= lm.n_; ++r) {
      auto v = rows[r].get<std::vector<double>>();
      RequireShape(v.size() == lm.n_ + 1, "BigramLm: bad row");
      std::copy(v.begin(), v.end(), lm.logp_.Row(r).begin());
    }
    return lm;
  }

 private:
  void Estimate(const std::vector<std::vector<int>> &transcripts) {
    const std::size_t V = n_ + 1;
    Matrix counts(V, V, 1.0);
    for (const auto &seq : transcripts) {
      std::size_t prev = n_;
      for (int t : seq) {
        Require(t >= 0 && static_cast<std::size_t>(t) < n_, "BigramLm: token out of range");
        counts(prev, static_cast<std::size_t>(t)) += 1.0;
        prev = static_cast<std::size_t>(t);
      }
      counts(prev, n_) += 1.0;
    }
    for (std::size_t r = 0; r < V; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < V; ++c) total += counts(r, c);
      for (std::size_t c = 0; c < V; ++c) logp_(r, c) = std::log(counts(r, c) / total);
    }
  }

  std::size_t n_ = 0;
  Matrix logp_;
};

}  // namespace a2a::recognizer
