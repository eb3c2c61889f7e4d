// a2a/mlan/frame_dnn.hpp

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

#include "a2a/featex/norm.hpp"
#include "a2a/numcore.hpp"

namespace a2a::mlan {

struct FrameDnnConfig {
  std::vector<std::size_t> hidden{256, 256};
  std::size_t bottleneck = 40;
  std::size_t max_epochs = 60;
  int patience = 5;
  std::size_t batch_frames = 256;
  double lr = 1e-3;
  double lr_decay = 0.5;

  Json ToJson() const {
    return {{"hidden", hidden}, {"bottleneck", bottleneck}, {"max_epochs", max_epochs}, {"patience", patience},
            {"batch_frames", batch_frames}, {"lr", lr}, {"lr_decay", lr_decay}};
  }
  static FrameDnnConfig FromJson(const Json &j, const std::string &where = "dnn") {
    FrameDnnConfig c;
    ConfigReader r(j, where);
    r.Get("hidden", c.hidden).Get("bottleneck", c.bottleneck).Get("max_epochs", c.max_epochs);
    r.Get("patience", c.patience).Get("batch_frames", c.batch_frames).Get("lr", c.lr).Get("lr_decay", c.lr_decay);
    r.Finish();
    if (c.bottleneck == 0 || c.batch_frames == 0) throw ConfigError(where + ": sizes must be positive");
    return c;
  }
};

/// Feed-forward ReLU classifier with a linear bottleneck right before the
/// softmax layer. Inputs are z-scored with stats kept alongside the weights.
class FrameDnn {
 public:
  FrameDnn(std::size_t input_dim, std::size_t num_classes, const FrameDnnConfig &cfg)
      : input_dim_(input_dim), num_classes_(num_classes), cfg_(cfg) {
    std::size_t in = input_dim;
    for (std::size_t h : cfg.hidden) {
      encoder_.Emplace<Affine>(in, h);
      encoder_.Emplace<Relu>(h);
      in = h;
    }
    encoder_.Emplace<Affine>(in, cfg.bottleneck);
    head_.Emplace<Affine>(cfg.bottleneck, num_classes);
    loss_ = &head_.Emplace<SoftmaxCe>(num_classes);
  }

  void Init(Rng &rng) {
    for (std::size_t i = 0; i < encoder_.size(); ++i)
      if (auto *a = dynamic_cast<Affine *>(&encoder_.at(i))) a->Init(rng, i + 1 < encoder_.size() ? std::sqrt(2.0) : 1.0);
    dynamic_cast<Affine &>(head_.at(0)).Init(rng);
  }

  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t bottleneck_dim() const { return cfg_.bottleneck; }
  const FrameDnnConfig &config() const { return cfg_; }

  void SetNorm(featex::NormStats s) { norm_ = std::move(s); }
  const featex::NormStats &norm() const { return norm_; }

  /// Normalized input -> bottleneck activations.
  Matrix Encode(const Matrix &x) {
    RequireShape(x.cols() == input_dim_, StrCat("FrameDnn: expected input dim ", input_dim_, ", got ", x.cols()));
    return encoder_.Forward(x);
  }

  /// Raw input -> bottleneck activations.
  Matrix Bottleneck(const Matrix &raw) { return Encode(norm_.dims() ? norm_.Apply(raw) : raw); }

  /// Normalized input -> log posteriors.
  Matrix LogPosteriors(const Matrix &x) {
    Matrix logits = head_.at(0).Forward(Encode(x));
    LogSoftmaxRowsInPlace(logits);
    return logits;
  }

  /// One forward/backward pass over a batch of normalized frames; returns
  /// the mean cross entropy and number of correct argmax predictions.
  std::pair<double, std::size_t> TrainStep(const Matrix &x, const std::vector<int> &labels) {
    loss_->SetTargets(labels);
    head_.Forward(Encode(x));
    const double loss = loss_->Loss();
    std::size_t correct = 0;
    const Matrix &p = loss_->posteriors();
    for (std::size_t r = 0; r < p.rows(); ++r) {
      auto row = p.Row(r);
      correct += static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()) == labels[r];
    }
    encoder_.Backward(head_.Backward(Matrix(1, 1, 1.0)));
    return {loss, correct};
  }

  ParamList Params() {
    ParamList out;
    const bool rename = !named_;
    named_ = true;
    AppendPrefixed(out, encoder_.Params(), "enc.", rename);
    AppendPrefixed(out, head_.Params(), "head.", rename);
    return out;
  }

  Json Describe() const {
    return {{"input_dim", input_dim_}, {"num_classes", num_classes_}, {"config", cfg_.ToJson()},
            {"norm", norm_.ToJson()}};
  }

  static std::unique_ptr<FrameDnn> FromDescription(const Json &j) {
    auto d = std::make_unique<FrameDnn>(j.at("input_dim").get<std::size_t>(), j.at("num_classes").get<std::size_t>(),
                                        FrameDnnConfig::FromJson(j.at("config")));
    d->SetNorm(featex::NormStats::FromJson(j.at("norm")));
    return d;
  }

 private:
  std::size_t input_dim_, num_classes_;
  FrameDnnConfig cfg_;
  LayerStack encoder_, head_;
  SoftmaxCe *loss_ = nullptr;
  featex::NormStats norm_;
  bool named_ = false;
};

/// Frames pooled from many utterances with their labels.
struct FrameSet {
  Matrix x;
  std::vector<int> labels;
};

inline FrameSet PoolFrames(const std::vector<Matrix> &seqs, const std::vector<std::vector<int>> &labels) {
  Require(!seqs.empty() && seqs.size() == labels.size(), "PoolFrames: sequences and labels must pair up");
  std::vector<const Matrix *> p;
  FrameSet fs;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    RequireShape(seqs[i].rows() == labels[i].size(), StrCat("PoolFrames: utterance ", i, " label length mismatch"));
    p.push_back(&seqs[i]);
    fs.labels.insert(fs.labels.end(), labels[i].begin(), labels[i].end());
  }
  fs.x = StackSequences(p).x;
  return fs;
}

struct DnnEpochLog {
  std::size_t epoch = 0;
  double train_ce = 0.0;
  double train_acc = 0.0;
  double dev_ce = 0.0;
  double dev_acc = 0.0;
};

struct DnnTrainResult {
  std::vector<DnnEpochLog> log;
  std::size_t best_epoch = 0;
};

/// Mean cross entropy and accuracy of `dnn` on normalized frames.
inline std::pair<double, double> EvaluateFrames(FrameDnn &dnn, const FrameSet &set, std::size_t chunk = 4096) {
  double ce = 0.0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < set.x.rows(); r += chunk) {
    const std::size_t n = std::min(chunk, set.x.rows() - r);
    Matrix lp = dnn.LogPosteriors(set.x.RowRange(r, n));
    for (std::size_t i = 0; i < n; ++i) {
      auto row = lp.Row(i);
      const int y = set.labels[r + i];
      ce -= row[static_cast<std::size_t>(y)];
      correct += static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()) == y;
    }
  }
  const auto N = static_cast<double>(set.x.rows());
  return {ce / N, static_cast<double>(correct) / N};
}

/// Frame cross-entropy training on shuffled frame minibatches with early
/// stopping on dev cross entropy. Sets the input norm from `train` and
/// leaves the best-dev parameters in place.
inline DnnTrainResult TrainFrameDnn(FrameDnn &dnn, FrameSet train, FrameSet dev, std::uint64_t seed,
                                    const std::string &source,
                                    const std::function<void(const DnnEpochLog &)> &on_epoch = {}) {
  Require(train.x.rows() > 0 && dev.x.rows() > 0, "TrainFrameDnn: empty data");
  for (const FrameSet *s : {&train, &dev})
    for (int y : s->labels)
      Require(y >= 0 && static_cast<std::size_t>(y) < dnn.num_classes(),
              StrCat("TrainFrameDnn: label ", y, " outside inventory of ", dnn.num_classes()));
  featex::NormStats norm = featex::NormStats::Compute(std::vector<const Matrix *>{&train.x}, source);
  dnn.SetNorm(norm);
  train.x = norm.Apply(train.x);
  dev.x = norm.Apply(dev.x);

  const FrameDnnConfig &cfg = dnn.config();
  Rng root(DeriveSeed(seed, "frame-dnn"));
  Rng init = root.Child("init"), order = root.Child("order");
  dnn.Init(init);
  ParamList params = dnn.Params();
  OptimizerConfig oc;
  oc.lr = cfg.lr;
  Optimizer opt(params, oc);
  EarlyStopper stopper(cfg.patience);
  std::vector<Matrix> best = SnapshotParams(params);
  DnnTrainResult res;
  const std::size_t D = train.x.cols();
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double ce = 0.0;
    std::size_t correct = 0;
    for (const auto &mb : MakeMinibatches(train.x.rows(), cfg.batch_frames, order)) {
      Matrix x(mb.size(), D);
      std::vector<int> y(mb.size());
      for (std::size_t i = 0; i < mb.size(); ++i) {
        std::copy_n(train.x.Row(mb[i]).begin(), D, x.Row(i).begin());
        y[i] = train.labels[mb[i]];
      }
      ZeroGrads(params);
      auto [loss, ok] = dnn.TrainStep(x, y);
      if (!std::isfinite(loss)) throw NumericError(StrCat("TrainFrameDnn: non-finite loss at epoch ", epoch));
      ce += loss * static_cast<double>(mb.size());
      correct += ok;
      opt.Step();
    }
    auto [dce, dacc] = EvaluateFrames(dnn, dev);
    const auto N = static_cast<double>(train.x.rows());
    DnnEpochLog e{epoch, ce / N, static_cast<double>(correct) / N, dce, dacc};
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

}  // namespace a2a::mlan
