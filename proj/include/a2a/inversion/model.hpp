// a2a/inversion/model.hpp

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
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "a2a/featex/norm.hpp"
#include "a2a/numcore.hpp"

namespace a2a::inversion {

inline constexpr char kCheckpointKind[] = "INV1";

struct InversionConfig {
  std::size_t layers = 2;
  std::size_t hidden = 96;  // per direction
  std::size_t output_dim = 144;
  std::size_t max_epochs = 60;
  int patience = 5;
  std::size_t batch_utts = 8;
  double lr = 1e-3;
  double lr_decay = 0.5;  // applied after each epoch without dev improvement
  double clip = 1.0;

  Json ToJson() const {
    return {{"layers", layers}, {"hidden", hidden}, {"output_dim", output_dim}, {"max_epochs", max_epochs},
            {"patience", patience}, {"batch_utts", batch_utts}, {"lr", lr}, {"lr_decay", lr_decay}, {"clip", clip}};
  }
  static InversionConfig FromJson(const Json &j) {
    InversionConfig c;
    ConfigReader r(j, "inversion");
    r.Get("layers", c.layers).Get("hidden", c.hidden).Get("output_dim", c.output_dim);
    r.Get("max_epochs", c.max_epochs).Get("patience", c.patience).Get("batch_utts", c.batch_utts);
    r.Get("lr", c.lr).Get("lr_decay", c.lr_decay).Get("clip", c.clip);
    r.Finish();
    if (c.layers == 0 || c.hidden == 0 || c.batch_utts == 0) throw ConfigError("inversion: sizes must be positive");
    return c;
  }
};

/// Forward and reverse LSTM over the same input, outputs concatenated.
class BiLstm {
 public:
  BiLstm(std::size_t in, std::size_t hidden) : fwd_(in, hidden, false), bwd_(in, hidden, true) {}

  void Init(Rng &rng) {
    fwd_.Init(rng);
    bwd_.Init(rng);
  }

  Matrix Forward(const Matrix &x, const SeqLayout &layout) {
    return HConcat(fwd_.Forward(x, layout), bwd_.Forward(x, layout));
  }

  Matrix Backward(const Matrix &g) {
    const std::size_t H = fwd_.OutputDim();
    Matrix dx = fwd_.Backward(g.ColRange(0, H));
    dx += bwd_.Backward(g.ColRange(H, H));
    return dx;
  }

  ParamList Params() {
    ParamList out;
    const bool rename = !named_;
    named_ = true;
    AppendPrefixed(out, fwd_.Params(), "fwd.", rename);
    AppendPrefixed(out, bwd_.Params(), "bwd.", rename);
    return out;
  }

  std::size_t OutputDim() const { return 2 * fwd_.OutputDim(); }

 private:
  LstmCell fwd_, bwd_;
  bool named_ = false;
};

/// Stacked Bi-LSTM regression from acoustic features to DCT articulatory
/// features. Inputs and outputs live in z-scored space; the stats travel
/// with the checkpoint.
class InversionModel {
 public:
  InversionModel(std::size_t input_dim, const InversionConfig &cfg)
      : input_dim_(input_dim), cfg_(cfg), out_(2 * cfg.hidden, cfg.output_dim) {
    Require(input_dim > 0, "InversionModel: zero input dim");
    std::size_t in = input_dim;
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      layers_.push_back(std::make_unique<BiLstm>(in, cfg.hidden));
      in = 2 * cfg.hidden;
    }
  }

  void Init(Rng &rng) {
    for (auto &l : layers_) l->Init(rng);
    out_.Init(rng);
  }

  std::size_t input_dim() const { return input_dim_; }
  const InversionConfig &config() const { return cfg_; }

  Matrix Forward(const Matrix &x, const SeqLayout &layout) {
    RequireShape(x.cols() == input_dim_,
                 StrCat("inversion: expected input dim ", input_dim_, ", got ", x.cols()));
    Matrix h = x;
    for (auto &l : layers_) h = l->Forward(h, layout);
    return out_.Forward(h, layout);
  }

  void Backward(const Matrix &grad) {
    Matrix g = out_.Backward(grad);
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->Backward(g);
  }

  ParamList Params() {
    ParamList out;
    const bool rename = !named_;
    named_ = true;
    for (std::size_t l = 0; l < layers_.size(); ++l) AppendPrefixed(out, layers_[l]->Params(), StrCat("blstm", l, "."), rename);
    AppendPrefixed(out, out_.Params(), "out.", rename);
    return out;
  }

  void SetNorms(featex::NormStats input, featex::NormStats target) {
    input_norm_ = std::move(input);
    target_norm_ = std::move(target);
  }
  const featex::NormStats &input_norm() const { return input_norm_; }
  const featex::NormStats &target_norm() const { return target_norm_; }

  /// Raw input features in, z-scored articulatory features out.
  Matrix Invert(const Matrix &raw) {
    Require(raw.rows() > 0, "invert: empty sequence");
    Matrix x = input_norm_.dims() ? input_norm_.Apply(raw) : raw;
    return Forward(x, SeqLayout::Single(x.rows()));
  }

  void Save(const std::filesystem::path &path) {
    Json cfg = cfg_.ToJson();
    cfg["input_dim"] = input_dim_;
    WriteCheckpoint(path, kCheckpointKind, cfg, Params(),
                    {{"input_norm", input_norm_.ToJson()}, {"target_norm", target_norm_.ToJson()}});
  }

  static std::unique_ptr<InversionModel> Load(const std::filesystem::path &path) {
    Checkpoint ck = ReadCheckpoint(path);
    RequireKind(ck, kCheckpointKind);
    Json cfg = ck.config();
    const auto input_dim = cfg.at("input_dim").get<std::size_t>();
    cfg.erase("input_dim");
    auto m = std::make_unique<InversionModel>(input_dim, InversionConfig::FromJson(cfg));
    RestoreParams(ck, m->Params());
    m->SetNorms(featex::NormStats::FromJson(ck.header.at("input_norm")),
                featex::NormStats::FromJson(ck.header.at("target_norm")));
    return m;
  }

 private:
  std::size_t input_dim_;
  InversionConfig cfg_;
  std::vector<std::unique_ptr<BiLstm>> layers_;
  Affine out_;
  featex::NormStats input_norm_, target_norm_;
  bool named_ = false;
};

/// Running sum of squared error for RMSE over many sequences.
struct RmseAccumulator {
  long double sse = 0.0L;
  std::size_t count = 0;

  void Add(const Matrix &pred, const Matrix &truth) {
    RequireShape(pred.SameShape(truth), StrCat("rmse: shape mismatch ", pred.rows(), "x", pred.cols(), " vs ",
                                               truth.rows(), "x", truth.cols()));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const long double d = pred.data()[i] - truth.data()[i];
      sse += d * d;
    }
    count += pred.size();
  }
  double Value() const {
    Require(count > 0, "rmse: nothing accumulated");
    return static_cast<double>(std::sqrt(sse / static_cast<long double>(count)));
  }
};

/// sqrt(mean over frames and dims of squared error).
inline double RmseEval(const Matrix &pred, const Matrix &truth) {
  RmseAccumulator acc;
  acc.Add(pred, truth);
  return acc.Value();
}

}  // namespace a2a::inversion
