// a2a/mlan/mismatch.hpp

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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "a2a/numcore.hpp"

namespace a2a::mlan {

/// Area under the ROC curve via the rank-sum statistic, ties averaged.
/// `scores` higher means "positive".
inline double RocAuc(const std::vector<double> &scores, const std::vector<int> &positive) {
  RequireShape(scores.size() == positive.size(), "RocAuc: size mismatch");
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t npos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j + 1);  // 1-based ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (positive[idx[k]]) {
        rank_sum += avg_rank;
        ++npos;
      }
    i = j;
  }
  const std::size_t nneg = scores.size() - npos;
  Require(npos > 0 && nneg > 0, "RocAuc: need both classes");
  const double np = static_cast<double>(npos), nn = static_cast<double>(nneg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// L2-regularized logistic regression fit by Newton's method.
struct LogisticModel {
  Eigen::VectorXd w;  // bias last

  static LogisticModel Fit(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, double l2 = 1e-3, int iters = 25) {
    const Eigen::Index n = x.rows(), d = x.cols() + 1;
    Eigen::MatrixXd xb(n, d);
    xb.leftCols(d - 1) = x;
    xb.col(d - 1).setOnes();
    LogisticModel m;
    m.w = Eigen::VectorXd::Zero(d);
    for (int it = 0; it < iters; ++it) {
      Eigen::VectorXd p = (1.0 + (-(xb * m.w).array()).exp()).inverse().matrix();
      Eigen::VectorXd g = xb.transpose() * (p - y) + l2 * static_cast<double>(n) * m.w;
      Eigen::VectorXd s = (p.array() * (1.0 - p.array())).max(1e-10).matrix();
      Eigen::MatrixXd hess = xb.transpose() * s.asDiagonal() * xb;
      hess.diagonal().array() += l2 * static_cast<double>(n);
      Eigen::VectorXd step = hess.ldlt().solve(g);
      m.w -= step;
      if (step.norm() < 1e-10) break;
    }
    return m;
  }

  Eigen::VectorXd Score(const Eigen::MatrixXd &x) const {
    return x * w.head(x.cols()) + Eigen::VectorXd::Constant(x.rows(), w(w.size() - 1));
  }
};

struct MismatchReport {
  double auc = 0.5;
  double mean_distance = 0.0;
  std::size_t frames_src = 0;
  std::size_t frames_tgt = 0;

  Json ToJson() const {
    return {{"auc", auc}, {"mean_distance", mean_distance}, {"frames_src", frames_src}, {"frames_tgt", frames_tgt}};
  }
};

struct MismatchOptions {
  std::size_t min_frames = 1000;
  std::size_t max_frames = 3000;  // per side, subsampled deterministically
  std::size_t folds = 5;
};

/// Separability of two frame sets: k-fold logistic classifier AUC on
/// held-out frames (oriented so it is at least 0.5) and the L2 distance of
/// the two mean vectors.
inline MismatchReport ComputeMismatch(const Matrix &src, const Matrix &tgt, std::uint64_t seed,
                                      const MismatchOptions &opt = {}) {
  RequireShape(src.cols() == tgt.cols(), "mismatch_report: dimension mismatch");
  Require(src.rows() >= opt.min_frames && tgt.rows() >= opt.min_frames,
          StrCat("mismatch_report: need at least ", opt.min_frames, " frames per side, got ", src.rows(), " and ",
                 tgt.rows()));
  MismatchReport rep;
  rep.frames_src = src.rows();
  rep.frames_tgt = tgt.rows();
  Matrix ms = ColSums(src), mt = ColSums(tgt);
  ms *= 1.0 / static_cast<double>(src.rows());
  mt *= 1.0 / static_cast<double>(tgt.rows());
  ms.AddScaled(mt, -1.0);
  rep.mean_distance = ms.FrobeniusNorm();

  Rng rng(DeriveSeed(seed, "mismatch"));
  auto pick = [&](const Matrix &m) {
    std::vector<std::size_t> idx(m.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.Shuffle(idx);
    idx.resize(std::min(idx.size(), opt.max_frames));
    return idx;
  };
  const auto is = pick(src), it = pick(tgt);
  const std::size_t n = is.size() + it.size(), d = src.cols();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool s = i < is.size();
    const auto row = s ? src.Row(is[i]) : tgt.Row(it[i - is.size()]);
    for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    y(static_cast<Eigen::Index>(i)) = s ? 0.0 : 1.0;
    fold[i] = (s ? i : i - is.size()) % opt.folds;
  }
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t f = 0; f < opt.folds; ++f) {
    std::vector<Eigen::Index> tr, te;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
    Eigen::MatrixXd xtr = x(tr, Eigen::all), xte = x(te, Eigen::all);
    Eigen::RowVectorXd mu = xtr.colwise().mean();
    Eigen::RowVectorXd sd = ((xtr.rowwise() - mu).array().square().colwise().mean()).sqrt().max(1e-8).matrix();
    xtr = (xtr.rowwise() - mu).array().rowwise() / sd.array();
    xte = (xte.rowwise() - mu).array().rowwise() / sd.array();
    LogisticModel m = LogisticModel::Fit(xtr, y(tr));
    Eigen::VectorXd s = m.Score(xte);
    for (std::size_t k = 0; k < te.size(); ++k) {
      scores[static_cast<std::size_t>(te[k])] = s(static_cast<Eigen::Index>(k));
      labels[static_cast<std::size_t>(te[k])] = y(te[k]) > 0.5;
    }
  }
  const double auc = RocAuc(scores, labels);
  rep.auc = std::max(auc, 1.0 - auc);
  return rep;
}

}  // namespace a2a::mlan
