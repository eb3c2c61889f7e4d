// a2a/recognizer/conformer.hpp

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

#include <memory>
#include <string>
#include <vector>

#include "a2a/featex/norm.hpp"
#include "a2a/numcore.hpp"
#include "a2a/recognizer/ctc.hpp"

namespace a2a::recognizer {

inline constexpr const char *kConformerKind = "CONF";

struct ConformerConfig {
  std::size_t input_dim = 40;
  std::size_t num_phones = 20;
  std::size_t dim = 128;
  std::size_t heads = 4;
  std::size_t blocks = 4;
  std::size_t ff_dim = 256;
  std::size_t kernel = 7;
  bool fusion = false;  // concatenate articulatory features at the input
  std::size_t af_dim = 144;

  std::size_t FrontInputDim() const { return input_dim + (fusion ? af_dim : 0); }
  int blank() const { return static_cast<int>(num_phones); }

  Json ToJson() const {
    return {{"input_dim", input_dim}, {"num_phones", num_phones}, {"dim", dim}, {"heads", heads},
            {"blocks", blocks}, {"ff_dim", ff_dim}, {"kernel", kernel}, {"fusion", fusion}, {"af_dim", af_dim}};
  }
  static ConformerConfig FromJson(const Json &j, const std::string &where = "conformer") {
    ConformerConfig c;
    ConfigReader r(j, where);
    r.Get("input_dim", c.input_dim).Get("num_phones", c.num_phones).Get("dim", c.dim).Get("heads", c.heads);
    r.Get("blocks", c.blocks).Get("ff_dim", c.ff_dim).Get("kernel", c.kernel).Get("fusion", c.fusion);
    r.Get("af_dim", c.af_dim);
    r.Finish();
    if (c.dim == 0 || c.heads == 0 || c.dim % c.heads != 0) throw ConfigError(where + ": dim must divide by heads");
    if (c.kernel % 2 == 0) throw ConfigError(where + ": kernel must be odd");
    return c;
  }
};

/// LN -> affine -> ReLU -> affine.
class FeedForwardModule {
 public:
  FeedForwardModule(std::size_t dim, std::size_t hidden)
      : norm_(dim), up_(dim, hidden), relu_(hidden), down_(hidden, dim) {}
  void Init(Rng &rng) {
    up_.Init(rng, std::sqrt(2.0));
    down_.Init(rng, 0.5);
  }
  Matrix Forward(const Matrix &x, const SeqLayout &l) {
    return down_.Forward(relu_.Forward(up_.Forward(norm_.Forward(x, l), l), l), l);
  }
  Matrix Backward(const Matrix &g) { return norm_.Backward(up_.Backward(relu_.Backward(down_.Backward(g)))); }
  ParamList Params(bool rename) {
    ParamList out;
    AppendPrefixed(out, norm_.Params(), "ln.", rename);
    AppendPrefixed(out, up_.Params(), "up.", rename);
    AppendPrefixed(out, down_.Params(), "down.", rename);
    return out;
  }

 private:
  LayerNorm norm_;
  Affine up_;
  Relu relu_;
  Affine down_;
};

/// LN -> pointwise affine -> depthwise time conv -> ReLU -> pointwise affine.
class ConvModule {
 public:
  ConvModule(std::size_t dim, std::size_t kernel)
      : norm_(dim), pw1_(dim, dim), dw_(dim, kernel), relu_(dim), pw2_(dim, dim) {}
  void Init(Rng &rng) {
    pw1_.Init(rng);
    dw_.Init(rng);
    pw2_.Init(rng, 0.5);
  }
  Matrix Forward(const Matrix &x, const SeqLayout &l) {
    return pw2_.Forward(relu_.Forward(dw_.Forward(pw1_.Forward(norm_.Forward(x, l), l), l), l), l);
  }
  Matrix Backward(const Matrix &g) {
    return norm_.Backward(pw1_.Backward(dw_.Backward(relu_.Backward(pw2_.Backward(g)))));
  }
  ParamList Params(bool rename) {
    ParamList out;
    AppendPrefixed(out, norm_.Params(), "ln.", rename);
    AppendPrefixed(out, pw1_.Params(), "pw1.", rename);
    AppendPrefixed(out, dw_.Params(), "dw.", rename);
    AppendPrefixed(out, pw2_.Params(), "pw2.", rename);
    return out;
  }

 private:
  LayerNorm norm_;
  Affine pw1_;
  DepthwiseConvTime dw_;
  Relu relu_;
  Affine pw2_;
};

/// x += FF/2; x += MHSA(LN x); x += Conv(x); x += FF/2; y = LN(x).
class ConformerBlock {
 public:
  ConformerBlock(const ConformerConfig &c)
      : ff1_(c.dim, c.ff_dim), att_norm_(c.dim), att_(c.dim, c.heads), conv_(c.dim, c.kernel),
        ff2_(c.dim, c.ff_dim), out_norm_(c.dim) {}

  void Init(Rng &rng) {
    ff1_.Init(rng);
    att_.Init(rng);
    conv_.Init(rng);
    ff2_.Init(rng);
  }

  Matrix Forward(Matrix x, const SeqLayout &l) {
    x.AddScaled(ff1_.Forward(x, l), 0.5);
    x += att_.Forward(att_norm_.Forward(x, l), l);
    x += conv_.Forward(x, l);
    x.AddScaled(ff2_.Forward(x, l), 0.5);
    return out_norm_.Forward(x, l);
  }

  Matrix Backward(const Matrix &grad) {
    Matrix g = out_norm_.Backward(grad);
    Matrix t = ff2_.Backward(g * 0.5);
    g += t;
    g += conv_.Backward(g);
    g += att_norm_.Backward(att_.Backward(g));
    t = ff1_.Backward(g * 0.5);
    g += t;
    return g;
  }

  ParamList Params(bool rename) {
    ParamList out;
    AppendPrefixed(out, ff1_.Params(rename), "ff1.", rename);
    AppendPrefixed(out, att_norm_.Params(), "att.ln.", rename);
    AppendPrefixed(out, att_.Params(), "att.", rename);
    AppendPrefixed(out, conv_.Params(rename), "conv.", rename);
    AppendPrefixed(out, ff2_.Params(rename), "ff2.", rename);
    AppendPrefixed(out, out_norm_.Params(), "ln.", rename);
    return out;
  }

 private:
  FeedForwardModule ff1_;
  LayerNorm att_norm_;
  MultiHeadAttention att_;
  ConvModule conv_;
  FeedForwardModule ff2_;
  LayerNorm out_norm_;
};

/// Conformer encoder with a CTC output layer over phones plus blank
/// (blank = num_phones). Output length is ceil(T / 2).
class ConformerCtc {
 public:
  explicit ConformerCtc(const ConformerConfig &cfg)
      : cfg_(cfg), sub_(cfg.FrontInputDim(), {-1, 0, 1}, 2), front_(3 * cfg.FrontInputDim(), cfg.dim),
        front_relu_(cfg.dim), out_(cfg.dim, cfg.num_phones + 1) {
    for (std::size_t b = 0; b < cfg.blocks; ++b) blocks_.push_back(std::make_unique<ConformerBlock>(cfg));
  }

  void Init(Rng &rng) {
    front_.Init(rng, std::sqrt(2.0));
    for (auto &b : blocks_) b->Init(rng);
    out_.Init(rng);
  }

  const ConformerConfig &config() const { return cfg_; }
  int blank() const { return cfg_.blank(); }

  void SetNorms(featex::NormStats fbk, featex::NormStats af) {
    fbk_norm_ = std::move(fbk);
    af_norm_ = std::move(af);
  }
  const featex::NormStats &fbk_norm() const { return fbk_norm_; }
  const featex::NormStats &af_norm() const { return af_norm_; }

  /// Normalized (and, with fusion, already concatenated) input -> logits.
  Matrix Forward(const Matrix &x, const SeqLayout &layout) {
    RequireShape(x.cols() == cfg_.FrontInputDim(),
                 StrCat("ConformerCtc: expected input dim ", cfg_.FrontInputDim(), ", got ", x.cols()));
    out_layout_ = sub_.OutputLayout(layout);
    Matrix h = front_relu_.Forward(front_.Forward(sub_.Forward(x, layout), out_layout_), out_layout_);
    for (auto &b : blocks_) h = b->Forward(std::move(h), out_layout_);
    return out_.Forward(h, out_layout_);
  }
  const SeqLayout &output_layout() const { return out_layout_; }

  void Backward(const Matrix &grad) {
    Matrix g = out_.Backward(grad);
    for (std::size_t b = blocks_.size(); b-- > 0;) g = blocks_[b]->Backward(g);
    sub_.Backward(front_.Backward(front_relu_.Backward(g)));
  }

  /// Builds the normalized network input from raw streams.
  Matrix PrepareInput(const Matrix &fbk, const Matrix *af) const {
    Matrix x = fbk_norm_.dims() ? fbk_norm_.Apply(fbk) : fbk;
    if (!cfg_.fusion) return x;
    if (!af || af->empty()) throw Error("ConformerCtc: fusion enabled but no articulatory features given");
    RequireShape(af->rows() == fbk.rows(), "ConformerCtc: articulatory feature length differs from acoustic stream");
    return HConcat(x, af_norm_.dims() ? af_norm_.Apply(*af) : *af);
  }

  /// Raw single-utterance inputs -> per-output-frame CTC log probabilities.
  Matrix LogProbs(const Matrix &fbk, const Matrix *af) {
    Matrix x = PrepareInput(fbk, af);
    Matrix lp = Forward(x, SeqLayout::Single(x.rows()));
    LogSoftmaxRowsInPlace(lp);
    return lp;
  }

  ParamList Params() {
    ParamList out;
    const bool rename = !named_;
    named_ = true;
    AppendPrefixed(out, front_.Params(), "front.", rename);
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      AppendPrefixed(out, blocks_[b]->Params(rename), StrCat("block", b + 1, "."), rename);
    AppendPrefixed(out, out_.Params(), "out.", rename);
    return out;
  }

  void Save(const std::filesystem::path &path) {
    Json extra{{"fbk_norm", fbk_norm_.ToJson()}, {"af_norm", af_norm_.ToJson()}};
    WriteCheckpoint(path, kConformerKind, cfg_.ToJson(), Params(), extra);
  }
  static std::unique_ptr<ConformerCtc> Load(const std::filesystem::path &path) {
    Checkpoint ck = ReadCheckpoint(path);
    RequireKind(ck, kConformerKind);
    auto m = std::make_unique<ConformerCtc>(ConformerConfig::FromJson(ck.config()));
    RestoreParams(ck, m->Params());
    featex::NormStats fn, an;
    if (ck.header.at("fbk_norm").at("dims").get<std::size_t>() > 0) fn = featex::NormStats::FromJson(ck.header.at("fbk_norm"));
    if (ck.header.at("af_norm").at("dims").get<std::size_t>() > 0) an = featex::NormStats::FromJson(ck.header.at("af_norm"));
    m->SetNorms(std::move(fn), std::move(an));
    return m;
  }

 private:
  ConformerConfig cfg_;
  TimeSplice sub_;
  Affine front_;
  Relu front_relu_;
  std::vector<std::unique_ptr<ConformerBlock>> blocks_;
  Affine out_;
  SeqLayout out_layout_;
  featex::NormStats fbk_norm_, af_norm_;
  bool named_ = false;
};

}  // namespace a2a::recognizer
