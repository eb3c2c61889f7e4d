// a2a/numcore/tdnnf.hpp

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
#include <optional>

#include "a2a/numcore/layers.hpp"
#include "a2a/numcore/semiorth.hpp"

namespace a2a {

/// Factorized TDNN layer:
///
///   z = B . [x(t-1), x(t)]            (bottleneck, B semi-orthogonal)
///   z += extra                        (optional additive input)
///   y = LN(ReLU(A . [z(t), z(t+1)] + a)) + bypass * x(t)
///
/// B has `bottleneck` rows and 2*dim columns, so rows <= cols always holds.
class TdnnfBlock : public Layer {
 public:
  TdnnfBlock(std::size_t dim, std::size_t bottleneck, double bypass = 0.66)
      : dim_(dim), bottleneck_(bottleneck), bypass_(bypass),
        splice_in_(dim, {-1, 0}), linear_(2 * dim, bottleneck, false),
        splice_bn_(bottleneck, {0, 1}), affine_(2 * bottleneck, dim), relu_(dim), norm_(dim) {
    linear_.weight().name = "B";
    affine_.weight().name = "A";
    affine_.bias().name = "A.b";
    auto np = norm_.Params();
    np[0]->name = "ln.gain";
    np[1]->name = "ln.bias";
  }

  /// B starts from a scaled gaussian pulled onto the semi-orthogonal set.
  void Init(Rng &rng) {
    linear_.Init(rng);
    ConstrainSemiOrthogonal(linear_.weight().value, 1e-10, 50);
    affine_.Init(rng, std::sqrt(2.0));
  }

  LayerKind kind() const override { return LayerKind::kTdnnfBlock; }
  std::size_t InputDim() const override { return dim_; }
  std::size_t OutputDim() const override { return dim_; }
  ParamList Params() override {
    ParamList out{&linear_.weight(), &affine_.weight(), &affine_.bias()};
    for (auto *p : norm_.Params()) out.push_back(p);
    return out;
  }
  Json Config() const override {
    return {{"kind", "TdnnfBlock"}, {"dim", dim_}, {"bottleneck", bottleneck_}, {"bypass", bypass_}};
  }

  std::size_t bottleneck() const { return bottleneck_; }
  Matrix &BFactor() { return linear_.weight().value; }
  const Matrix &BFactor() const { return linear_.weight().value; }

  /// Matrix added to the bottleneck activation on the next Forward only.
  void SetBottleneckAdd(const Matrix *extra) { extra_ = extra; }
  /// Gradient w.r.t. the bottleneck activation from the last Backward.
  const Matrix &bottleneck_grad() const { return bn_grad_; }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &layout) override {
    Matrix z = linear_.Forward(splice_in_.Forward(in, layout), layout);
    if (extra_) {
      RequireShape(extra_->SameShape(z), "TdnnfBlock: bottleneck add shape");
      z += *extra_;
      extra_ = nullptr;
    }
    Matrix h = affine_.Forward(splice_bn_.Forward(z, layout), layout);
    Matrix y = norm_.Forward(relu_.Forward(h, layout), layout);
    y.AddScaled(in, bypass_);
    return y;
  }
  Matrix DoBackward(const Matrix &g) override {
    Matrix dh = relu_.Backward(norm_.Backward(g));
    bn_grad_ = splice_bn_.Backward(affine_.Backward(dh));
    Matrix dx = splice_in_.Backward(linear_.Backward(bn_grad_));
    dx.AddScaled(g, bypass_);
    return dx;
  }

 private:
  std::size_t dim_, bottleneck_;
  double bypass_;
  TimeSplice splice_in_;
  Affine linear_;
  TimeSplice splice_bn_;
  Affine affine_;
  Relu relu_;
  LayerNorm norm_;
  const Matrix *extra_ = nullptr;
  Matrix bn_grad_;
};

}  // namespace a2a
