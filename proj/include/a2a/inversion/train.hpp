// a2a/inversion/train.hpp

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

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "a2a/inversion/model.hpp"

namespace a2a::inversion {

/// Paired raw input and target sequences, one entry per utterance.
struct ParallelSet {
  std::vector<Matrix> inputs;
  std::vector<Matrix> targets;

  std::size_t size() const { return inputs.size(); }
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_rmse = 0.0;
  double dev_rmse = 0.0;
};

struct TrainedInversion {
  std::unique_ptr<InversionModel> model;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_dev_rmse = 0.0;
};

/// Runs `model` over every sequence in groups of `batch` and returns
/// z-scored predictions in input order. Inputs must already be normalized.
inline std::vector<Matrix> PredictNormalized(InversionModel &model, const std::vector<Matrix> &xs,
                                             std::size_t batch = 16) {
  std::vector<Matrix> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); i += batch) {
    std::vector<const Matrix *> group;
    for (std::size_t j = i; j < std::min(xs.size(), i + batch); ++j) group.push_back(&xs[j]);
    Batch b = StackSequences(group);
    for (auto &m : SplitSequences(model.Forward(b.x, b.layout), b.layout)) out.push_back(std::move(m));
  }
  return out;
}

/// Raw inputs in, z-scored articulatory predictions out.
inline std::vector<Matrix> InvertAll(InversionModel &model, const std::vector<Matrix> &raw) {
  std::vector<Matrix> xs;
  xs.reserve(raw.size());
  for (const auto &m : raw) xs.push_back(model.input_norm().Apply(m));
  return PredictNormalized(model, xs);
}

namespace detail {
inline void CheckParallel(const ParallelSet &s, const char *what) {
  Require(s.size() > 0, StrCat("train_inversion: empty ", what, " set"));
  Require(s.targets.size() == s.inputs.size(), StrCat("train_inversion: missing targets in ", what, " set"));
  for (std::size_t i = 0; i < s.size(); ++i)
    RequireShape(s.inputs[i].rows() == s.targets[i].rows() && s.inputs[i].rows() > 0,
                 StrCat("train_inversion: ", what, " utterance ", i, " input/target length mismatch"));
}
}  // namespace detail

/// Frame-level MSE training with Adam, full-utterance unrolling, and early
/// stopping on dev RMSE. The returned model holds the best-dev parameters.
inline TrainedInversion TrainInversion(const ParallelSet &train, const ParallelSet &dev, const InversionConfig &cfg,
                                       std::uint64_t seed, const std::string &source = "SRC/train",
                                       const std::function<void(const EpochLog &)> &on_epoch = {}) {
  detail::CheckParallel(train, "train");
  detail::CheckParallel(dev, "dev");
  const std::size_t in_dim = train.inputs.front().cols();
  featex::NormStats in_norm = featex::NormStats::Compute(train.inputs, source);
  featex::NormStats tgt_norm = featex::NormStats::Compute(train.targets, source);
  auto normalize = [](const std::vector<Matrix> &v, const featex::NormStats &s) {
    std::vector<Matrix> out;
    for (const auto &m : v) out.push_back(s.Apply(m));
    return out;
  };
  const auto tx = normalize(train.inputs, in_norm), ty = normalize(train.targets, tgt_norm);
  const auto dx = normalize(dev.inputs, in_norm), dy = normalize(dev.targets, tgt_norm);

  TrainedInversion res;
  res.model = std::make_unique<InversionModel>(in_dim, cfg);
  res.model->SetNorms(in_norm, tgt_norm);
  Rng root(DeriveSeed(seed, "inversion"));
  Rng init = root.Child("init");
  res.model->Init(init);
  InversionModel &model = *res.model;
  ParamList params = model.Params();
  OptimizerConfig oc;
  oc.lr = cfg.lr;
  oc.clip = cfg.clip;
  Optimizer opt(params, oc);
  EarlyStopper stopper(cfg.patience);
  std::vector<Matrix> best = SnapshotParams(params);
  Rng order = root.Child("order");

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    RmseAccumulator train_acc;
    for (const auto &mb : MakeMinibatches(tx.size(), cfg.batch_utts, order)) {
      std::vector<const Matrix *> xs, ys;
      for (auto i : mb) {
        xs.push_back(&tx[i]);
        ys.push_back(&ty[i]);
      }
      Batch bx = StackSequences(xs), by = StackSequences(ys);
      ZeroGrads(params);
      Matrix pred = model.Forward(bx.x, bx.layout);
      train_acc.Add(pred, by.x);
      Matrix grad = pred;
      grad.AddScaled(by.x, -1.0);
      grad *= 2.0 / static_cast<double>(grad.size());
      if (!std::isfinite(grad.FrobeniusNorm()))
        throw NumericError(StrCat("train_inversion: non-finite loss at epoch ", epoch));
      model.Backward(grad);
      opt.Step();
    }
    RmseAccumulator dev_acc;
    const auto dp = PredictNormalized(model, dx);
    for (std::size_t i = 0; i < dp.size(); ++i) dev_acc.Add(dp[i], dy[i]);
    EpochLog e{epoch, train_acc.Value(), dev_acc.Value()};
    if (!std::isfinite(e.train_rmse) || !std::isfinite(e.dev_rmse))
      throw NumericError(StrCat("train_inversion: non-finite loss at epoch ", epoch));
    res.log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (stopper.Update(e.dev_rmse)) {
      best = SnapshotParams(params);
      res.best_epoch = epoch;
      res.best_dev_rmse = e.dev_rmse;
    } else {
      opt.set_lr(opt.config().lr * cfg.lr_decay);
    }
    if (stopper.ShouldStop()) break;
  }
  RestoreSnapshot(params, best);
  return res;
}

/// RMSE of z-scored predictions against raw targets normalized with the
/// model's target stats.
inline double EvaluateRmse(InversionModel &model, const ParallelSet &set) {
  const auto pred = InvertAll(model, set.inputs);
  RmseAccumulator acc;
  for (std::size_t i = 0; i < pred.size(); ++i) acc.Add(pred[i], model.target_norm().Apply(set.targets[i]));
  return acc.Value();
}

}  // namespace a2a::inversion
