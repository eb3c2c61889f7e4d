// a2a/mlan/model.hpp

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

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "a2a/featex/augment.hpp"
#include "a2a/mlan/frame_dnn.hpp"

namespace a2a::mlan {

inline constexpr char kCheckpointKind[] = "MLAN";

struct MlanConfig {
  std::size_t context = 3;
  FrameDnnConfig level1;
  FrameDnnConfig level2;

  MlanConfig() { level2.bottleneck = 80; }

  Json ToJson() const { return {{"context", context}, {"level1", level1.ToJson()}, {"level2", level2.ToJson()}}; }
  static MlanConfig FromJson(const Json &j) {
    MlanConfig c;
    ConfigReader r(j, "mlan");
    r.Get("context", c.context);
    if (const Json *l1 = r.Sub("level1")) c.level1 = FrameDnnConfig::FromJson(*l1, "mlan.level1");
    if (const Json *l2 = r.Sub("level2")) {
      Json merged = c.level2.ToJson();
      merged.update(*l2);
      c.level2 = FrameDnnConfig::FromJson(merged, "mlan.level2");
    }
    r.Finish();
    return c;
  }
};

/// Labelled acoustic data for one domain split.
struct LabelledSet {
  std::vector<Matrix> fbk;
  std::vector<std::vector<int>> labels;
};

/// Two cascaded bottleneck DNNs. Level 1 is trained on the target domain;
/// level 2 on source frames with level-1 bottlenecks appended.
class MlanModel {
 public:
  MlanModel(std::unique_ptr<FrameDnn> l1, std::unique_ptr<FrameDnn> l2, std::size_t context)
      : l1_(std::move(l1)), l2_(std::move(l2)), context_(context) {
    RequireShape(l2_->input_dim() == l1_->input_dim() + l1_->bottleneck_dim(),
                 "MlanModel: level-2 input must be level-1 input plus level-1 bottleneck");
  }

  FrameDnn &level1() { return *l1_; }
  FrameDnn &level2() { return *l2_; }
  std::size_t context() const { return context_; }
  std::size_t output_dim() const { return l2_->bottleneck_dim(); }

  Matrix Level1Bottleneck(const Matrix &fbk) { return l1_->Bottleneck(featex::Splice(fbk, context_)); }

  /// Level-2 input for a raw fbk sequence.
  Matrix Level2Input(const Matrix &fbk) {
    Matrix s = featex::Splice(fbk, context_);
    return HConcat(s, l1_->Bottleneck(s));
  }

  /// fbk -> level-1 bottleneck -> level-2 bottleneck, same for any domain.
  Matrix ExtractBottleneck(const Matrix &fbk) {
    RequireShape(fbk.cols() * context_ == l1_->input_dim(),
                 StrCat("extract_bottleneck: expected fbk dim ", l1_->input_dim() / context_, ", got ", fbk.cols()));
    return l2_->Bottleneck(Level2Input(fbk));
  }

  ParamList Params() {
    ParamList out;
    const bool rename = !named_;
    named_ = true;
    AppendPrefixed(out, l1_->Params(), "l1.", rename);
    AppendPrefixed(out, l2_->Params(), "l2.", rename);
    return out;
  }

  void Save(const std::filesystem::path &path) {
    WriteCheckpoint(path, kCheckpointKind, {{"context", context_}}, Params(),
                    {{"level1", l1_->Describe()}, {"level2", l2_->Describe()}});
  }

  static std::unique_ptr<MlanModel> Load(const std::filesystem::path &path) {
    Checkpoint ck = ReadCheckpoint(path);
    RequireKind(ck, kCheckpointKind);
    auto m = std::make_unique<MlanModel>(FrameDnn::FromDescription(ck.header.at("level1")),
                                         FrameDnn::FromDescription(ck.header.at("level2")),
                                         ck.config().at("context").get<std::size_t>());
    RestoreParams(ck, m->Params());
    return m;
  }

 private:
  std::unique_ptr<FrameDnn> l1_, l2_;
  std::size_t context_;
  bool named_ = false;
};

struct TrainedMlan {
  std::unique_ptr<MlanModel> model;
  DnnTrainResult level1_log;
  DnnTrainResult level2_log;
};

/// Level 1 on target frames and target phones, then level 2 on source
/// frames (spliced fbk plus level-1 bottleneck) and source phones.
inline TrainedMlan TrainMlan(const LabelledSet &tgt_train, const LabelledSet &tgt_dev, std::size_t tgt_phones,
                             const LabelledSet &src_train, const LabelledSet &src_dev, std::size_t src_phones,
                             const MlanConfig &cfg, std::uint64_t seed,
                             const std::function<void(int, const DnnEpochLog &)> &on_epoch = {}) {
  Require(!tgt_train.fbk.empty() && !src_train.fbk.empty(), "train_mlan: empty training data");
  const std::size_t fbk_dim = tgt_train.fbk.front().cols();
  auto splice_all = [&](const std::vector<Matrix> &v) {
    std::vector<Matrix> out;
    for (const auto &m : v) out.push_back(featex::Splice(m, cfg.context));
    return out;
  };
  TrainedMlan res;
  auto l1 = std::make_unique<FrameDnn>(fbk_dim * cfg.context, tgt_phones, cfg.level1);
  res.level1_log = TrainFrameDnn(*l1, PoolFrames(splice_all(tgt_train.fbk), tgt_train.labels),
                                 PoolFrames(splice_all(tgt_dev.fbk), tgt_dev.labels), DeriveSeed(seed, "level1"),
                                 "target/train", [&](const DnnEpochLog &e) {
                                   if (on_epoch) on_epoch(1, e);
                                 });
  auto l2 = std::make_unique<FrameDnn>(fbk_dim * cfg.context + cfg.level1.bottleneck, src_phones, cfg.level2);
  res.model = std::make_unique<MlanModel>(std::move(l1), std::move(l2), cfg.context);
  auto level2_inputs = [&](const std::vector<Matrix> &v) {
    std::vector<Matrix> out;
    for (const auto &m : v) out.push_back(res.model->Level2Input(m));
    return out;
  };
  res.level2_log = TrainFrameDnn(res.model->level2(), PoolFrames(level2_inputs(src_train.fbk), src_train.labels),
                                 PoolFrames(level2_inputs(src_dev.fbk), src_dev.labels), DeriveSeed(seed, "level2"),
                                 "SRC/train", [&](const DnnEpochLog &e) {
                                   if (on_epoch) on_epoch(2, e);
                                 });
  return res;
}

}  // namespace a2a::mlan
