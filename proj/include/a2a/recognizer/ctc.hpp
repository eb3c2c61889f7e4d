// a2a/recognizer/ctc.hpp

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
#include <limits>
#include <map>
#include <vector>

#include "a2a/numcore/layers.hpp"
#include "a2a/recognizer/lm.hpp"

namespace a2a::recognizer {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

namespace ctc_detail {

inline std::vector<int> Extend(const std::vector<int> &labels, int blank) {
  std::vector<int> ext{blank};
  for (int l : labels) {
    ext.push_back(l);
    ext.push_back(blank);
  }
  return ext;
}

inline bool CanSkip(const std::vector<int> &ext, std::size_t s, int blank) {
  return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
}

/// log alpha(t, s): all prefixes of the alignment ending in ext[s] at t.
inline Matrix Alpha(const Matrix &lp, const std::vector<int> &ext, int blank) {
  const std::size_t T = lp.rows(), S = ext.size();
  Matrix a(T, S, kLogZero);
  a(0, 0) = lp(0, static_cast<std::size_t>(ext[0]));
  if (S > 1) a(0, 1) = lp(0, static_cast<std::size_t>(ext[1]));
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      double v = a(t - 1, s);
      if (s >= 1) v = LogAdd(v, a(t - 1, s - 1));
      if (CanSkip(ext, s, blank)) v = LogAdd(v, a(t - 1, s - 2));
      a(t, s) = v == kLogZero ? kLogZero : v + lp(t, static_cast<std::size_t>(ext[s]));
    }
  return a;
}

/// log beta(t, s): probability of frames t+1.. given ext[s] emitted at t.
inline Matrix Beta(const Matrix &lp, const std::vector<int> &ext, int blank) {
  const std::size_t T = lp.rows(), S = ext.size();
  Matrix b(T, S, kLogZero);
  b(T - 1, S - 1) = 0.0;
  if (S > 1) b(T - 1, S - 2) = 0.0;
  for (std::size_t t = T - 1; t-- > 0;)
    for (std::size_t s = 0; s < S; ++s) {
      double v = kLogZero;
      for (std::size_t n = s; n <= std::min(S - 1, s + 2); ++n) {
        if (n == s + 2 && !CanSkip(ext, n, blank)) continue;
        if (b(t + 1, n) == kLogZero) continue;
        v = LogAdd(v, b(t + 1, n) + lp(t + 1, static_cast<std::size_t>(ext[n])));
      }
      b(t, s) = v;
    }
  return b;
}

}  // namespace ctc_detail

/// log P(labels | frames) under CTC for per-frame log probabilities.
/// Returns -inf when no alignment fits.
inline double CtcLogProb(const Matrix &log_probs, const std::vector<int> &labels, int blank) {
  Require(log_probs.rows() > 0, "CtcLogProb: empty input");
  for (int l : labels)
    Require(l >= 0 && static_cast<std::size_t>(l) < log_probs.cols() && l != blank, "CtcLogProb: bad label");
  const auto ext = ctc_detail::Extend(labels, blank);
  const Matrix a = ctc_detail::Alpha(log_probs, ext, blank);
  const std::size_t T = log_probs.rows(), S = ext.size();
  double p = a(T - 1, S - 1);
  if (S > 1) p = LogAdd(p, a(T - 1, S - 2));
  return p;
}

struct CtcLossResult {
  double loss = 0.0;  // -log P(labels | x)
  Matrix grad;        // d loss / d logits
  bool feasible = true;
};

/// CTC loss for one sequence given logits (pre-softmax). The gradient is
/// softmax minus label occupancy.
inline CtcLossResult CtcLoss(const Matrix &logits, const std::vector<int> &labels, int blank) {
  Matrix lp = logits;
  LogSoftmaxRowsInPlace(lp);
  const auto ext = ctc_detail::Extend(labels, blank);
  const Matrix a = ctc_detail::Alpha(lp, ext, blank);
  const std::size_t T = lp.rows(), S = ext.size(), K = lp.cols();
  double logp = a(T - 1, S - 1);
  if (S > 1) logp = LogAdd(logp, a(T - 1, S - 2));
  CtcLossResult r;
  r.grad = Matrix(T, K);
  if (logp == kLogZero) {
    r.feasible = false;
    return r;
  }
  r.loss = -logp;
  const Matrix b = ctc_detail::Beta(lp, ext, blank);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> occ(K, kLogZero);
    for (std::size_t s = 0; s < S; ++s) {
      const auto k = static_cast<std::size_t>(ext[s]);
      occ[k] = LogAdd(occ[k], a(t, s) + b(t, s));
    }
    for (std::size_t k = 0; k < K; ++k)
      r.grad(t, k) = std::exp(lp(t, k)) - (occ[k] == kLogZero ? 0.0 : std::exp(occ[k] - logp));
  }
  return r;
}

/// Collapses a frame-level path: merge repeats, drop blanks.
inline std::vector<int> CollapsePath(const std::vector<int> &path, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (int k : path) {
    if (k != prev && k != blank) out.push_back(k);
    prev = k;
  }
  return out;
}

}  // namespace a2a::recognizer
