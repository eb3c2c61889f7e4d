// a2a/evalviz/tsne.hpp

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
#include <map>
#include <string>
#include <vector>

#include "a2a/numcore/config.hpp"
#include "a2a/numcore/layer.hpp"
#include "a2a/numcore/matrix.hpp"
#include "a2a/numcore/rng.hpp"

namespace a2a::evalviz {

struct TsneConfig {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  std::size_t exaggeration_iters = 100;
  double exaggeration = 12.0;
  std::size_t momentum_switch = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;

  Json ToJson() const {
    return {{"perplexity", perplexity}, {"iterations", iterations}, {"learning_rate", learning_rate}};
  }
  static TsneConfig FromJson(const Json &j, const std::string &where = "tsne") {
    TsneConfig c;
    ConfigReader r(j, where);
    r.Get("perplexity", c.perplexity).Get("iterations", c.iterations).Get("learning_rate", c.learning_rate);
    r.Finish();
    if (c.perplexity <= 0 || c.iterations == 0) throw ConfigError(where + ": perplexity and iterations must be positive");
    return c;
  }
};

struct EmbeddedPoint {
  double x = 0.0, y = 0.0;
  std::string label;
  std::string utt_id;
};

struct Embedding2D {
  std::vector<EmbeddedPoint> points;
  double perplexity = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> kl;  // objective after each iteration
};

namespace tsne_detail {

inline Matrix SquaredDistances(const Matrix &x) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
  auto e = x.AsEigen();
  Eigen::VectorXd sq = e.rowwise().squaredNorm();
  Eigen::MatrixXd g = e * e.transpose();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      d(i, j) = i == j ? 0.0 : std::max(0.0, sq(Eigen::Index(i)) + sq(Eigen::Index(j)) - 2.0 * g(Eigen::Index(i), Eigen::Index(j)));
  return d;
}

}  // namespace tsne_detail

/// Row-conditional affinities p(j|i) with per-point bandwidths found by
/// bisection so that each row's entropy matches log(perplexity).
inline Matrix ConditionalAffinities(const Matrix &x, double perplexity, double tol = 1e-5, int max_iter = 200) {
  const std::size_t n = x.rows();
  const Matrix d = tsne_detail::SquaredDistances(x);
  const double target = std::log(perplexity);
  Matrix p(n, n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, d(i, j));
    bool ok = false;
    for (int it = 0; it < max_iter; ++it) {
      double sum = 0.0, wsum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = j == i ? 0.0 : std::exp(-beta * (d(i, j) - dmin));
        sum += row[j];
        wsum += row[j] * (d(i, j) - dmin);
      }
      const double h = std::log(sum) + beta * wsum / sum;
      if (std::abs(h - target) < tol) {
        ok = true;
        break;
      }
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    if (!ok) throw Error(StrCat("tsne: perplexity search failed for point ", i, " (degenerate input?)"));
    double sum = 0.0;
    for (double v : row) sum += v;
    for (std::size_t j = 0; j < n; ++j) p(i, j) = row[j] / sum;
  }
  return p;
}

/// Exact t-SNE by gradient descent on KL(P || Q) with gains, momentum and
/// early exaggeration.
inline Embedding2D Tsne(const Matrix &x, const std::vector<std::string> &labels,
                        const std::vector<std::string> &utt_ids, const TsneConfig &cfg, std::uint64_t seed) {
  const std::size_t n = x.rows();
  Require(n >= 10 && n <= 2000, StrCat("tsne: need 10..2000 points, got ", n));
  Require(cfg.perplexity > 0 && cfg.perplexity < static_cast<double>(n) / 3.0, "tsne: perplexity must be below n/3");
  RequireShape(labels.size() == n && utt_ids.size() == n, "tsne: labels and ids must match the point count");
  Matrix cond = ConditionalAffinities(x, cfg.perplexity);
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = std::max((cond(i, j) + cond(j, i)) / (2.0 * static_cast<double>(n)), 1e-300);

  Rng rng(DeriveSeed(seed, "tsne"));
  Matrix y = Matrix::Gaussian(n, 2, rng, 1e-2);
  Matrix vel(n, 2), gains(n, 2, 1.0), grad(n, 2);
  Matrix num(n, n);
  Embedding2D out;
  out.perplexity = cfg.perplexity;
  out.iterations = cfg.iterations;
  out.seed = seed;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const double exag = it < cfg.exaggeration_iters ? cfg.exaggeration : 1.0;
    const double mom = it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
    double zsum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) {
          num(i, j) = 0.0;
          continue;
        }
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
        zsum += num(i, j);
      }
    grad.SetZero();
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num(i, j) / zsum, 1e-300);
        kl += p(i, j) * std::log(p(i, j) / q);
        const double m = (exag * p(i, j) - q) * num(i, j);
        grad(i, 0) += 4.0 * m * (y(i, 0) - y(j, 0));
        grad(i, 1) += 4.0 * m * (y(i, 1) - y(j, 1));
      }
    if (it > 0) out.kl.push_back(kl);
    for (std::size_t k = 0; k < y.size(); ++k) {
      double &g = gains.data()[k];
      const double gr = grad.data()[k], v = vel.data()[k];
      g = (gr > 0) != (v > 0) ? g + 0.2 : std::max(g * 0.8, 0.01);
      vel.data()[k] = mom * v - cfg.learning_rate * g * gr;
      y.data()[k] += vel.data()[k];
    }
    Matrix mean = ColSums(y) * (1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      y(i, 0) -= mean(0, 0);
      y(i, 1) -= mean(0, 1);
    }
  }
  RequireFinite(y, "tsne");
  for (std::size_t i = 0; i < n; ++i) out.points.push_back({y(i, 0), y(i, 1), labels[i], utt_ids[i]});
  return out;
}

/// Mean silhouette s = (b - a) / max(a, b) with Euclidean distances;
/// points in singleton clusters score 0.
inline double Silhouette(const Matrix &x, const std::vector<std::string> &labels) {
  const std::size_t n = x.rows();
  RequireShape(labels.size() == n, "silhouette: label count mismatch");
  std::map<std::string, std::size_t> count;
  for (const auto &l : labels) ++count[l];
  Require(count.size() >= 2, "silhouette: need at least two labels");
  const Matrix d2 = tsne_detail::SquaredDistances(x);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (count[labels[i]] == 1) continue;
    std::map<std::string, double> sum;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[labels[j]] += std::sqrt(d2(i, j));
    const double a = sum[labels[i]] / static_cast<double>(count[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto &[l, s] : sum)
      if (l != labels[i]) b = std::min(b, s / static_cast<double>(count[l]));
    const double m = std::max(a, b);
    total += m > 0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

inline double Silhouette(const Embedding2D &e) {
  Matrix x(e.points.size(), 2);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < e.points.size(); ++i) {
    x(i, 0) = e.points[i].x;
    x(i, 1) = e.points[i].y;
    labels.push_back(e.points[i].label);
  }
  return Silhouette(x, labels);
}

}  // namespace a2a::evalviz
