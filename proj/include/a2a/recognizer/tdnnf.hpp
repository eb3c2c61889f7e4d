// a2a/recognizer/tdnnf.hpp

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

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "a2a/featex/norm.hpp"
#include "a2a/numcore.hpp"

namespace a2a::recognizer {

inline constexpr const char *kTdnnfKind = "TDNF";

struct FusionConfig {
  bool enabled = false;
  std::size_t layer = 3;  // 1-based block index receiving the UTI subnet output
  std::size_t af_dim = 144;
  std::size_t subnet_hidden = 160;

  Json ToJson() const {
    return {{"enabled", enabled}, {"layer", layer}, {"af_dim", af_dim}, {"subnet_hidden", subnet_hidden}};
  }
  static FusionConfig FromJson(const Json &j, const std::string &where) {
    FusionConfig c;
    ConfigReader r(j, where);
    r.Get("enabled", c.enabled).Get("layer", c.layer).Get("af_dim", c.af_dim).Get("subnet_hidden", c.subnet_hidden);
    r.Finish();
    return c;
  }
};

struct TdnnfConfig {
  std::size_t input_dim = 40;
  std::size_t num_phones = 20;
  std::size_t blocks = 5;
  std::size_t hidden = 256;
  std::size_t bottleneck = 160;
  double bypass = 0.66;
  FusionConfig fusion;

  Json ToJson() const {
    return {{"input_dim", input_dim}, {"num_phones", num_phones}, {"blocks", blocks}, {"hidden", hidden},
            {"bottleneck", bottleneck}, {"bypass", bypass}, {"fusion", fusion.ToJson()}};
  }
  static TdnnfConfig FromJson(const Json &j, const std::string &where = "tdnnf") {
    TdnnfConfig c;
    ConfigReader r(j, where);
    r.Get("input_dim", c.input_dim).Get("num_phones", c.num_phones).Get("blocks", c.blocks);
    r.Get("hidden", c.hidden).Get("bottleneck", c.bottleneck).Get("bypass", c.bypass);
    if (const Json *f = r.Sub("fusion")) c.fusion = FusionConfig::FromJson(*f, where + ".fusion");
    r.Finish();
    c.Validate(where);
    return c;
  }
  void Validate(const std::string &where = "tdnnf") const {
    if (blocks == 0 || hidden == 0 || bottleneck == 0 || num_phones < 2 || input_dim == 0)
      throw ConfigError(where + ": sizes must be positive");
    if (bottleneck > 2 * hidden) throw ConfigError(where + ": bottleneck wider than spliced block input");
    if (fusion.layer < 1 || fusion.layer > blocks)
      throw ConfigError(StrCat(where, ".fusion.layer must be in 1..", blocks));
  }
};

/// Per-speaker LHUC vectors, one 1 x dim row per insertion site.
struct LhucState {
  std::map<std::string, std::vector<Matrix>> speakers;

  Json ToJson() const {
    Json j = Json::object();
    for (const auto &[spk, sites] : speakers) {
      Json arr = Json::array();
      for (const auto &a : sites) arr.push_back(a.data());
      j[spk] = arr;
    }
    return j;
  }
  static LhucState FromJson(const Json &j) {
    LhucState s;
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::vector<Matrix> sites;
      for (const auto &row : it.value()) sites.push_back(Matrix::RowVector(row.get<std::vector<double>>()));
      s.speakers[it.key()] = std::move(sites);
    }
    return s;
  }
};

/// Factorized-TDNN acoustic model:
///
///   splice(-1,0,1) -> affine -> TDNN layer -> N TdnnfBlocks -> affine -> softmax
///
/// With fusion on, a UTI subnet maps articulatory features to the block k
/// bottleneck width and its output is added to that bottleneck. LHUC sites
/// sit after blocks 1 and k and after the UTI subnet; their scales are
/// swapped in per speaker and are not part of Params().
class TdnnfRecognizer {
 public:
  explicit TdnnfRecognizer(const TdnnfConfig &cfg)
      : cfg_(cfg), splice_in_(cfg.input_dim, {-1, 0, 1}), input_(3 * cfg.input_dim, cfg.hidden),
        tdnn_splice_(cfg.hidden, {-1, 0, 1}), tdnn_(3 * cfg.hidden, cfg.hidden), tdnn_relu_(cfg.hidden),
        tdnn_norm_(cfg.hidden), out_(cfg.hidden, cfg.num_phones), loss_(cfg.num_phones),
        sub1_(cfg.fusion.af_dim, cfg.fusion.subnet_hidden), sub_relu_(cfg.fusion.subnet_hidden),
        sub2_(cfg.fusion.subnet_hidden, cfg.bottleneck), lhuc_uti_(cfg.bottleneck) {
    cfg_.Validate();
    for (std::size_t b = 0; b < cfg.blocks; ++b)
      blocks_.push_back(std::make_unique<TdnnfBlock>(cfg.hidden, cfg.bottleneck, cfg.bypass));
    for (std::size_t b : LhucBlocks()) lhuc_main_.emplace(b, std::make_unique<LhucScale>(cfg.hidden));
  }

  void Init(Rng &rng) {
    input_.Init(rng);
    tdnn_.Init(rng, std::sqrt(2.0));
    for (auto &b : blocks_) b->Init(rng);
    out_.Init(rng);
    if (cfg_.fusion.enabled) {
      sub1_.Init(rng, std::sqrt(2.0));
      sub2_.Init(rng);
    }
  }

  const TdnnfConfig &config() const { return cfg_; }
  bool fused() const { return cfg_.fusion.enabled; }

  void SetNorms(featex::NormStats fbk, featex::NormStats af) {
    fbk_norm_ = std::move(fbk);
    af_norm_ = std::move(af);
  }
  const featex::NormStats &fbk_norm() const { return fbk_norm_; }
  const featex::NormStats &af_norm() const { return af_norm_; }

  /// 1-based block indices carrying main-path LHUC (1 and k, deduplicated).
  std::vector<std::size_t> LhucBlocks() const {
    if (cfg_.fusion.layer == 1) return {1};
    return {1, cfg_.fusion.layer};
  }

  /// Normalized inputs -> logits. `af` is ignored unless fusion is on.
  Matrix Forward(const Matrix &fbk, const Matrix *af, const SeqLayout &layout) {
    RequireShape(fbk.cols() == cfg_.input_dim,
                 StrCat("TdnnfRecognizer: expected input dim ", cfg_.input_dim, ", got ", fbk.cols()));
    if (cfg_.fusion.enabled) {
      if (!af || af->empty()) throw Error("TdnnfRecognizer: fusion enabled but no articulatory features given");
      RequireShape(af->rows() == fbk.rows() && af->cols() == cfg_.fusion.af_dim,
                   "TdnnfRecognizer: articulatory feature shape does not match the acoustic stream");
      uti_ = lhuc_uti_.Forward(sub2_.Forward(sub_relu_.Forward(sub1_.Forward(*af, layout), layout), layout), layout);
    }
    Matrix x = input_.Forward(splice_in_.Forward(fbk, layout), layout);
    x = tdnn_norm_.Forward(tdnn_relu_.Forward(tdnn_.Forward(tdnn_splice_.Forward(x, layout), layout), layout), layout);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const std::size_t idx = b + 1;
      if (cfg_.fusion.enabled && idx == cfg_.fusion.layer) blocks_[b]->SetBottleneckAdd(&uti_);
      x = blocks_[b]->Forward(x, layout);
      if (auto it = lhuc_main_.find(idx); it != lhuc_main_.end()) x = it->second->Forward(x, layout);
    }
    return out_.Forward(x, layout);
  }

  /// Backpropagates a logits gradient through the whole network.
  void Backward(const Matrix &grad) {
    Matrix g = out_.Backward(grad);
    Matrix uti_grad;
    for (std::size_t b = blocks_.size(); b-- > 0;) {
      const std::size_t idx = b + 1;
      if (auto it = lhuc_main_.find(idx); it != lhuc_main_.end()) g = it->second->Backward(g);
      g = blocks_[b]->Backward(g);
      if (cfg_.fusion.enabled && idx == cfg_.fusion.layer) uti_grad = blocks_[b]->bottleneck_grad();
    }
    g = tdnn_splice_.Backward(tdnn_.Backward(tdnn_relu_.Backward(tdnn_norm_.Backward(g))));
    splice_in_.Backward(input_.Backward(g));
    if (cfg_.fusion.enabled) sub1_.Backward(sub_relu_.Backward(sub2_.Backward(lhuc_uti_.Backward(uti_grad))));
  }

  /// Frame cross entropy step on normalized inputs; returns (mean CE, correct).
  std::pair<double, std::size_t> TrainStep(const Matrix &fbk, const Matrix *af, const SeqLayout &layout,
                                           const std::vector<int> &labels) {
    loss_.SetTargets(labels);
    loss_.Forward(Forward(fbk, af, layout), layout);
    const double ce = loss_.Loss();
    std::size_t correct = 0;
    const Matrix &p = loss_.posteriors();
    for (std::size_t r = 0; r < p.rows(); ++r) {
      auto row = p.Row(r);
      correct += static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()) == labels[r];
    }
    Backward(loss_.Backward(Matrix(1, 1, 1.0)));
    return {ce, correct};
  }

  /// Raw single-utterance inputs -> frame log posteriors.
  Matrix LogPosteriors(const Matrix &fbk, const Matrix *af) {
    Matrix x = fbk_norm_.dims() ? fbk_norm_.Apply(fbk) : fbk;
    Matrix a;
    if (cfg_.fusion.enabled) {
      Require(af != nullptr, "TdnnfRecognizer: fusion enabled but no articulatory features given");
      a = af_norm_.dims() ? af_norm_.Apply(*af) : *af;
    }
    Matrix lp = Forward(x, cfg_.fusion.enabled ? &a : nullptr, SeqLayout::Single(x.rows()));
    LogSoftmaxRowsInPlace(lp);
    return lp;
  }

  /// Shared (speaker-independent) parameters.
  ParamList Params() {
    ParamList out;
    const bool rename = !named_;
    named_ = true;
    AppendPrefixed(out, input_.Params(), "in.", rename);
    AppendPrefixed(out, tdnn_.Params(), "tdnn.", rename);
    AppendPrefixed(out, tdnn_norm_.Params(), "tdnn.ln.", rename);
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      AppendPrefixed(out, blocks_[b]->Params(), StrCat("block", b + 1, "."), rename);
    AppendPrefixed(out, out_.Params(), "out.", rename);
    if (cfg_.fusion.enabled) {
      AppendPrefixed(out, sub1_.Params(), "uti.0.", rename);
      AppendPrefixed(out, sub2_.Params(), "uti.1.", rename);
    }
    return out;
  }

  /// LHUC alpha parameters in site order: main sites by block, then UTI.
  ParamList LhucParams() {
    ParamList out;
    for (auto &[b, l] : lhuc_main_) out.push_back(&l->alpha());
    if (cfg_.fusion.enabled) out.push_back(&lhuc_uti_.alpha());
    return out;
  }

  /// Loads a speaker's alphas, or zeros (identity) when unknown.
  void ApplyLhuc(const LhucState &state, const std::string &speaker) {
    ParamList ps = LhucParams();
    auto it = state.speakers.find(speaker);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (it == state.speakers.end()) {
        ps[i]->value.SetZero();
      } else {
        RequireShape(it->second.size() == ps.size() && it->second[i].SameShape(ps[i]->value),
                     "LhucState: site layout does not match model for speaker " + speaker);
        ps[i]->value = it->second[i];
      }
    }
  }
  void ResetLhuc() {
    for (auto *p : LhucParams()) p->value.SetZero();
  }
  std::vector<Matrix> CurrentLhuc() {
    std::vector<Matrix> out;
    for (auto *p : LhucParams()) out.push_back(p->value);
    return out;
  }

  std::vector<Matrix *> BFactors() {
    std::vector<Matrix *> out;
    for (auto &b : blocks_) out.push_back(&b->BFactor());
    return out;
  }
  /// One semi-orthogonal update on every B factor.
  void SemiOrthogonalUpdate() {
    for (auto *b : BFactors()) *b = SemiOrthogonalStep(*b);
  }
  double MaxSemiOrthogonalDefect() {
    double d = 0.0;
    for (auto *b : BFactors()) d = std::max(d, SemiOrthogonalDefect(*b));
    return d;
  }

  /// Parameter count of the UTI subnet (zero when fusion is off).
  std::size_t SubnetParamCount() {
    if (!cfg_.fusion.enabled) return 0;
    return CountParams(sub1_.Params()) + CountParams(sub2_.Params());
  }

  void Save(const std::filesystem::path &path) {
    Json extra{{"fbk_norm", fbk_norm_.ToJson()}, {"af_norm", af_norm_.ToJson()}};
    WriteCheckpoint(path, kTdnnfKind, cfg_.ToJson(), Params(), extra);
  }
  static std::unique_ptr<TdnnfRecognizer> Load(const std::filesystem::path &path) {
    Checkpoint ck = ReadCheckpoint(path);
    RequireKind(ck, kTdnnfKind);
    auto m = std::make_unique<TdnnfRecognizer>(TdnnfConfig::FromJson(ck.config()));
    RestoreParams(ck, m->Params());
    featex::NormStats fn, an;
    if (ck.header.at("fbk_norm").at("dims").get<std::size_t>() > 0) fn = featex::NormStats::FromJson(ck.header.at("fbk_norm"));
    if (ck.header.at("af_norm").at("dims").get<std::size_t>() > 0) an = featex::NormStats::FromJson(ck.header.at("af_norm"));
    m->SetNorms(std::move(fn), std::move(an));
    return m;
  }

 private:
  TdnnfConfig cfg_;
  TimeSplice splice_in_;
  Affine input_;
  TimeSplice tdnn_splice_;
  Affine tdnn_;
  Relu tdnn_relu_;
  LayerNorm tdnn_norm_;
  std::vector<std::unique_ptr<TdnnfBlock>> blocks_;
  std::map<std::size_t, std::unique_ptr<LhucScale>> lhuc_main_;
  Affine out_;
  SoftmaxCe loss_;
  Affine sub1_;
  Relu sub_relu_;
  Affine sub2_;
  LhucScale lhuc_uti_;
  Matrix uti_;
  featex::NormStats fbk_norm_, af_norm_;
  bool named_ = false;
};

}  // namespace a2a::recognizer
