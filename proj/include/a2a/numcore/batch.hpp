// a2a/numcore/batch.hpp

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

#include "a2a/numcore/layer.hpp"
#include "a2a/numcore/rng.hpp"

namespace a2a {

/// Several sequences stacked row-wise with their layout.
struct Batch {
  Matrix x;
  SeqLayout layout;
};

inline Batch StackSequences(const std::vector<const Matrix *> &seqs) {
  Require(!seqs.empty(), "StackSequences: no sequences");
  const std::size_t d = seqs.front()->cols();
  std::size_t total = 0;
  for (const Matrix *m : seqs) {
    RequireShape(m->cols() == d, "StackSequences: dimension mismatch");
    total += m->rows();
  }
  Batch b{Matrix(total, d), {}};
  std::size_t r = 0;
  for (const Matrix *m : seqs) {
    std::copy(m->data().begin(), m->data().end(), b.x.data().begin() + static_cast<std::ptrdiff_t>(r * d));
    r += m->rows();
    b.layout.lengths.push_back(m->rows());
  }
  return b;
}

/// Inverse of StackSequences for a model output with the same layout.
inline std::vector<Matrix> SplitSequences(const Matrix &m, const SeqLayout &layout) {
  RequireShape(m.rows() == layout.Total(), "SplitSequences: row count does not match layout");
  std::vector<Matrix> out;
  std::size_t r = 0;
  for (auto len : layout.lengths) {
    out.push_back(m.RowRange(r, len));
    r += len;
  }
  return out;
}

/// Shuffled groups of at most `size` indices out of [0, n).
inline std::vector<std::vector<std::size_t>> MakeMinibatches(std::size_t n, std::size_t size, Rng &rng) {
  Require(size > 0, "MakeMinibatches: zero batch size");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.Shuffle(order);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += size)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + size)));
  return out;
}

/// Tracks the best value of a metric (lower is better) and counts epochs
/// without improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  /// Returns true if `value` is a new best.
  bool Update(double value) {
    if (value < best_) {
      best_ = value;
      bad_ = 0;
      return true;
    }
    ++bad_;
    return false;
  }
  bool ShouldStop() const { return bad_ >= patience_; }
  double best() const { return best_; }

 private:
  int patience_;
  int bad_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

/// Snapshot of parameter values, for keeping the best-dev model in memory.
inline std::vector<Matrix> SnapshotParams(const ParamList &params) {
  std::vector<Matrix> out;
  for (const auto *p : params) out.push_back(p->value);
  return out;
}

inline void RestoreSnapshot(const ParamList &params, const std::vector<Matrix> &snap) {
  RequireShape(params.size() == snap.size(), "RestoreSnapshot: size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

}  // namespace a2a
