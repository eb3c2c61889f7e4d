// a2a/recognizer/train.hpp

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
#include <string>
#include <vector>

#include "a2a/featex/norm.hpp"
#include "a2a/numcore.hpp"
#include "a2a/recognizer/conformer.hpp"
#include "a2a/recognizer/ctc.hpp"
#include "a2a/recognizer/tdnnf.hpp"

namespace a2a::recognizer {

/// One utterance as the recognizers see it. `af` is empty when the system
/// does not use articulatory features.
struct AsrUtterance {
  std::string id;
  std::string speaker;
  Matrix fbk;
  Matrix af;
  std::vector<int> labels;  // frame-level phone labels
  std::vector<int> tokens;  // phone sequence
};

struct RecognizerTrainConfig {
  std::size_t max_epochs = 20;
  int patience = 3;
  std::size_t batch_utts = 8;
  double lr = 1e-3;
  double lr_decay = 0.5;
  double clip = 1.0;
  std::size_t orth_every = 4;

  Json ToJson() const {
    return {{"max_epochs", max_epochs}, {"patience", patience}, {"batch_utts", batch_utts}, {"lr", lr},
            {"lr_decay", lr_decay}, {"clip", clip}, {"orth_every", orth_every}};
  }
  static RecognizerTrainConfig FromJson(const Json &j, const std::string &where = "train") {
    RecognizerTrainConfig c;
    ConfigReader r(j, where);
    r.Get("max_epochs", c.max_epochs).Get("patience", c.patience).Get("batch_utts", c.batch_utts);
    r.Get("lr", c.lr).Get("lr_decay", c.lr_decay).Get("clip", c.clip).Get("orth_every", c.orth_every);
    r.Finish();
    if (c.batch_utts == 0 || c.max_epochs == 0) throw ConfigError(where + ": sizes must be positive");
    return c;
  }
};

struct RecEpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;  // frame accuracy (TDNN-F only)
  double dev_loss = 0.0;
  double dev_acc = 0.0;
};

struct RecTrainResult {
  std::vector<RecEpochLog> log;
  std::size_t best_epoch = 0;
};

/// Per-call hook that may replace an utterance's streams before it enters a
/// training minibatch (speed perturbation, SpecAugment).
using AugmentFn = std::function<AsrUtterance(const AsrUtterance &, std::size_t epoch, Rng &)>;

namespace train_detail {

inline featex::NormStats StreamNorm(const std::vector<AsrUtterance> &set, bool af, const std::string &source) {
  std::vector<const Matrix *> ms;
  for (const auto &u : set) ms.push_back(af ? &u.af : &u.fbk);
  return featex::NormStats::Compute(ms, source);
}

inline void RequireAf(const std::vector<AsrUtterance> &set, std::size_t af_dim, const char *what) {
  for (const auto &u : set)
    if (u.af.rows() != u.fbk.rows() || u.af.cols() != af_dim)
      throw Error(StrCat(what, ": utterance ", u.id, " lacks articulatory features of dim ", af_dim));
}

inline std::size_t Argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace train_detail

/// Mean frame cross entropy and frame accuracy of a TDNN-F model on raw
/// utterances (normalization applied inside the model).
inline std::pair<double, double> EvaluateTdnnf(TdnnfRecognizer &m, const std::vector<AsrUtterance> &set) {
  double ce = 0.0;
  std::size_t correct = 0, frames = 0;
  for (const auto &u : set) {
    Matrix lp = m.LogPosteriors(u.fbk, m.fused() ? &u.af : nullptr);
    for (std::size_t t = 0; t < lp.rows(); ++t) {
      const auto y = static_cast<std::size_t>(u.labels[t]);
      ce -= lp(t, y);
      correct += train_detail::Argmax(lp.Row(t)) == y;
    }
    frames += lp.rows();
  }
  return {ce / static_cast<double>(frames), static_cast<double>(correct) / static_cast<double>(frames)};
}

/// Frame cross-entropy training with a semi-orthogonal step on every B
/// factor each `orth_every` updates. Keeps the best-dev parameters.
inline RecTrainResult TrainTdnnf(TdnnfRecognizer &m, const std::vector<AsrUtterance> &train,
                                 const std::vector<AsrUtterance> &dev, const RecognizerTrainConfig &cfg,
                                 std::uint64_t seed, const std::string &source,
                                 const std::function<void(const RecEpochLog &)> &on_epoch = {},
                                 const AugmentFn &augment = {}) {
  Require(!train.empty() && !dev.empty(), "TrainTdnnf: empty data");
  const TdnnfConfig &mc = m.config();
  for (const auto *set : {&train, &dev})
    for (const auto &u : *set) {
      RequireShape(u.labels.size() == u.fbk.rows(), "TrainTdnnf: label length mismatch in " + u.id);
      for (int y : u.labels)
        Require(y >= 0 && static_cast<std::size_t>(y) < mc.num_phones, "TrainTdnnf: label outside inventory in " + u.id);
    }
  if (m.fused()) {
    train_detail::RequireAf(train, mc.fusion.af_dim, "TrainTdnnf");
    train_detail::RequireAf(dev, mc.fusion.af_dim, "TrainTdnnf");
  }
  m.SetNorms(train_detail::StreamNorm(train, false, source),
             m.fused() ? train_detail::StreamNorm(train, true, source) : featex::NormStats{});
  m.ResetLhuc();

  Rng root(DeriveSeed(seed, "tdnnf"));
  Rng init = root.Child("init"), order = root.Child("order"), aug = root.Child("augment");
  m.Init(init);
  ParamList params = m.Params();
  OptimizerConfig oc;
  oc.lr = cfg.lr;
  oc.clip = cfg.clip;
  Optimizer opt(params, oc);
  EarlyStopper stopper(cfg.patience);
  std::vector<Matrix> best = SnapshotParams(params);
  RecTrainResult res;
  std::size_t updates = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double ce = 0.0;
    std::size_t correct = 0, frames = 0;
    for (const auto &mb : MakeMinibatches(train.size(), cfg.batch_utts, order)) {
      std::vector<AsrUtterance> local;
      local.reserve(mb.size());
      for (std::size_t i : mb) local.push_back(augment ? augment(train[i], epoch, aug) : train[i]);
      std::vector<const Matrix *> xs, as;
      std::vector<Matrix> xn, an;
      std::vector<int> y;
      for (const auto &u : local) {
        xn.push_back(m.fbk_norm().Apply(u.fbk));
        if (m.fused()) an.push_back(m.af_norm().Apply(u.af));
        y.insert(y.end(), u.labels.begin(), u.labels.end());
      }
      for (auto &x : xn) xs.push_back(&x);
      for (auto &a : an) as.push_back(&a);
      Batch bx = StackSequences(xs);
      Matrix ab = m.fused() ? StackSequences(as).x : Matrix();
      ZeroGrads(params);
      auto [loss, ok] = m.TrainStep(bx.x, m.fused() ? &ab : nullptr, bx.layout, y);
      if (!std::isfinite(loss)) throw NumericError(StrCat("TrainTdnnf: non-finite loss at epoch ", epoch));
      ce += loss * static_cast<double>(y.size());
      correct += ok;
      frames += y.size();
      opt.Step();
      if (cfg.orth_every > 0 && ++updates % cfg.orth_every == 0) m.SemiOrthogonalUpdate();
    }
    for (auto *b : m.BFactors()) ConstrainSemiOrthogonal(*b, 1e-4, 10);
    auto [dce, dacc] = EvaluateTdnnf(m, dev);
    if (!std::isfinite(dce)) throw NumericError(StrCat("TrainTdnnf: non-finite dev loss at epoch ", epoch));
    RecEpochLog e{epoch, ce / static_cast<double>(frames), static_cast<double>(correct) / static_cast<double>(frames),
                  dce, dacc};
    res.log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (stopper.Update(dce)) {
      best = SnapshotParams(params);
      res.best_epoch = epoch;
    } else {
      opt.set_lr(opt.config().lr * cfg.lr_decay);
    }
    if (stopper.ShouldStop()) break;
  }
  RestoreSnapshot(params, best);
  return res;
}

/// Mean per-output-frame CTC loss over feasible utterances.
inline double EvaluateConformer(ConformerCtc &m, const std::vector<AsrUtterance> &set) {
  double loss = 0.0;
  std::size_t frames = 0;
  for (const auto &u : set) {
    Matrix x = m.PrepareInput(u.fbk, m.config().fusion ? &u.af : nullptr);
    Matrix logits = m.Forward(x, SeqLayout::Single(x.rows()));
    Matrix lp = logits;
    LogSoftmaxRowsInPlace(lp);
    const double lg = CtcLogProb(lp, u.tokens, m.blank());
    if (lg == kLogZero) continue;
    loss -= lg;
    frames += lp.rows();
  }
  Require(frames > 0, "EvaluateConformer: no feasible utterance");
  return loss / static_cast<double>(frames);
}

/// CTC training on utterance minibatches; the loss is normalized by the
/// number of output frames in the batch. Keeps the best-dev parameters.
inline RecTrainResult TrainConformer(ConformerCtc &m, const std::vector<AsrUtterance> &train,
                                     const std::vector<AsrUtterance> &dev, const RecognizerTrainConfig &cfg,
                                     std::uint64_t seed, const std::string &source,
                                     const std::function<void(const RecEpochLog &)> &on_epoch = {},
                                     const AugmentFn &augment = {}) {
  Require(!train.empty() && !dev.empty(), "TrainConformer: empty data");
  const ConformerConfig &mc = m.config();
  for (const auto *set : {&train, &dev})
    for (const auto &u : *set) {
      Require(!u.tokens.empty(), "TrainConformer: empty transcript in " + u.id);
      for (int y : u.tokens)
        Require(y >= 0 && static_cast<std::size_t>(y) < mc.num_phones, "TrainConformer: token outside inventory in " + u.id);
    }
  if (mc.fusion) {
    train_detail::RequireAf(train, mc.af_dim, "TrainConformer");
    train_detail::RequireAf(dev, mc.af_dim, "TrainConformer");
  }
  m.SetNorms(train_detail::StreamNorm(train, false, source),
             mc.fusion ? train_detail::StreamNorm(train, true, source) : featex::NormStats{});

  Rng root(DeriveSeed(seed, "conformer"));
  Rng init = root.Child("init"), order = root.Child("order"), aug = root.Child("augment");
  m.Init(init);
  ParamList params = m.Params();
  OptimizerConfig oc;
  oc.lr = cfg.lr;
  oc.clip = cfg.clip;
  Optimizer opt(params, oc);
  EarlyStopper stopper(cfg.patience);
  std::vector<Matrix> best = SnapshotParams(params);
  RecTrainResult res;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double total = 0.0;
    std::size_t frames = 0;
    for (const auto &mb : MakeMinibatches(train.size(), cfg.batch_utts, order)) {
      std::vector<Matrix> xs;
      std::vector<std::vector<int>> ys;
      for (std::size_t i : mb) {
        const AsrUtterance u = augment ? augment(train[i], epoch, aug) : train[i];
        xs.push_back(m.PrepareInput(u.fbk, mc.fusion ? &u.af : nullptr));
        ys.push_back(u.tokens);
      }
      std::vector<const Matrix *> ptrs;
      for (auto &x : xs) ptrs.push_back(&x);
      Batch b = StackSequences(ptrs);
      ZeroGrads(params);
      Matrix logits = m.Forward(b.x, b.layout);
      const SeqLayout &ol = m.output_layout();
      Matrix grad(logits.rows(), logits.cols());
      double loss = 0.0;
      std::size_t off = 0, used = 0;
      for (std::size_t s = 0; s < ol.NumSeqs(); ++s) {
        const std::size_t len = ol.lengths[s];
        CtcLossResult r = CtcLoss(logits.RowRange(off, len), ys[s], m.blank());
        if (r.feasible) {
          loss += r.loss;
          used += len;
          for (std::size_t t = 0; t < len; ++t)
            std::copy_n(r.grad.Row(t).begin(), grad.cols(), grad.Row(off + t).begin());
        }
        off += len;
      }
      if (used == 0) continue;
      if (!std::isfinite(loss)) throw NumericError(StrCat("TrainConformer: non-finite loss at epoch ", epoch));
      grad *= 1.0 / static_cast<double>(used);
      m.Backward(grad);
      opt.Step();
      total += loss;
      frames += used;
    }
    const double dl = EvaluateConformer(m, dev);
    if (!std::isfinite(dl)) throw NumericError(StrCat("TrainConformer: non-finite dev loss at epoch ", epoch));
    RecEpochLog e{epoch, frames ? total / static_cast<double>(frames) : 0.0, 0.0, dl, 0.0};
    res.log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (stopper.Update(dl)) {
      best = SnapshotParams(params);
      res.best_epoch = epoch;
    } else {
      opt.set_lr(opt.config().lr * cfg.lr_decay);
    }
    if (stopper.ShouldStop()) break;
  }
  RestoreSnapshot(params, best);
  return res;
}

struct LhucConfig {
  std::size_t epochs = 10;
  double lr = 1e-2;
  double clamp = 10.0;
  std::size_t batch_utts = 4;

  Json ToJson() const { return {{"epochs", epochs}, {"lr", lr}, {"clamp", clamp}, {"batch_utts", batch_utts}}; }
  static LhucConfig FromJson(const Json &j, const std::string &where = "lhuc") {
    LhucConfig c;
    ConfigReader r(j, where);
    r.Get("epochs", c.epochs).Get("lr", c.lr).Get("clamp", c.clamp).Get("batch_utts", c.batch_utts);
    r.Finish();
    if (c.epochs > 10) throw ConfigError(where + ".epochs must be at most 10");
    if (c.batch_utts == 0) throw ConfigError(where + ".batch_utts must be positive");
    return c;
  }
};

/// Fits one speaker's LHUC scales with all shared parameters frozen. The
/// utterances' `labels` serve as targets; pass first-pass alignments there
/// for unsupervised adaptation. The result is stored in `state`.
inline void LhucAdapt(TdnnfRecognizer &m, const std::string &speaker, const std::vector<AsrUtterance> &utts,
                      const LhucConfig &cfg, std::uint64_t seed, LhucState &state) {
  Require(!utts.empty(), "LhucAdapt: no adaptation data for speaker " + speaker);
  m.ApplyLhuc(state, speaker);
  ParamList shared = m.Params();
  ParamList alphas = m.LhucParams();
  OptimizerConfig oc;
  oc.lr = cfg.lr;
  Optimizer opt(alphas, oc);
  Rng order(DeriveSeed(seed, "lhuc/" + speaker));
  std::vector<Matrix> xn, an;
  for (const auto &u : utts) {
    RequireShape(u.labels.size() == u.fbk.rows(), "LhucAdapt: label length mismatch in " + u.id);
    xn.push_back(m.fbk_norm().Apply(u.fbk));
    if (m.fused()) an.push_back(m.af_norm().Apply(u.af));
  }
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto &mb : MakeMinibatches(utts.size(), cfg.batch_utts, order)) {
      std::vector<const Matrix *> xs, as;
      std::vector<int> y;
      for (std::size_t i : mb) {
        xs.push_back(&xn[i]);
        if (m.fused()) as.push_back(&an[i]);
        y.insert(y.end(), utts[i].labels.begin(), utts[i].labels.end());
      }
      Batch bx = StackSequences(xs);
      Matrix ab = m.fused() ? StackSequences(as).x : Matrix();
      ZeroGrads(alphas);
      auto [loss, ok] = m.TrainStep(bx.x, m.fused() ? &ab : nullptr, bx.layout, y);
      (void)ok;
      if (!std::isfinite(loss)) throw NumericError("LhucAdapt: non-finite loss for speaker " + speaker);
      opt.Step();
      for (auto *a : alphas)
        for (double &v : a->value.data()) v = std::clamp(v, -cfg.clamp, cfg.clamp);
    }
  }
  ZeroGrads(shared);
  state.speakers[speaker] = m.CurrentLhuc();
}

/// Frame labels from a first-pass decode: per-frame argmax of the model's
/// own posteriors under the current LHUC state.
inline std::vector<int> FirstPassLabels(TdnnfRecognizer &m, const AsrUtterance &u) {
  Matrix lp = m.LogPosteriors(u.fbk, m.fused() ? &u.af : nullptr);
  std::vector<int> out(lp.rows());
  for (std::size_t t = 0; t < lp.rows(); ++t) out[t] = static_cast<int>(train_detail::Argmax(lp.Row(t)));
  return out;
}

}  // namespace a2a::recognizer
