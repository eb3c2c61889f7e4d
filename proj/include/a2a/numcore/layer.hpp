// a2a/numcore/layer.hpp

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
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2a/numcore/matrix.hpp"

namespace a2a {

using Json = nlohmann::json;

enum class LayerKind {
  kAffine,
  kRelu,
  kSigmoid,
  kTanh,
  kLayerNorm,
  kSoftmaxCe,
  kLstmCell,
  kTimeSplice,
  kTdnnfBlock,
  kMultiHeadAttention,
  kDepthwiseConvTime,
  kLhucScale,
};

inline std::string_view LayerKindName(LayerKind k) {
  switch (k) {
    case LayerKind::kAffine: return "Affine";
    case LayerKind::kRelu: return "ReLU";
    case LayerKind::kSigmoid: return "Sigmoid";
    case LayerKind::kTanh: return "Tanh";
    case LayerKind::kLayerNorm: return "LayerNorm";
    case LayerKind::kSoftmaxCe: return "SoftmaxCE";
    case LayerKind::kLstmCell: return "LstmCell";
    case LayerKind::kTimeSplice: return "TimeSplice";
    case LayerKind::kTdnnfBlock: return "TdnnfBlock";
    case LayerKind::kMultiHeadAttention: return "MultiHeadAttention";
    case LayerKind::kDepthwiseConvTime: return "DepthwiseConvTime";
    case LayerKind::kLhucScale: return "LhucScale";
  }
  return "?";
}

/// A named parameter matrix with its accumulated gradient.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;

  Param() = default;
  Param(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)) {
    grad = Matrix(value.rows(), value.cols());
  }
};

using ParamList = std::vector<Param *>;

inline void ZeroGrads(const ParamList &params) {
  for (auto *p : params) p->grad.SetZero();
}

/// Appends `in` to `out`, prepending `prefix` to each name when `rename`
/// is set. Containers rename only on their first Params() call so nested
/// names stay stable across calls.
inline void AppendPrefixed(ParamList &out, const ParamList &in, const std::string &prefix, bool rename) {
  for (auto *p : in) {
    if (rename) p->name = prefix + p->name;
    out.push_back(p);
  }
}

inline std::size_t CountParams(const ParamList &params) {
  std::size_t n = 0;
  for (const auto *p : params) n += p->value.size();
  return n;
}

/// Uniform forward/backward contract. Forward caches whatever Backward needs;
/// Backward returns the input gradient and accumulates into Param::grad.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  /// Expected input width; 0 accepts any width.
  virtual std::size_t InputDim() const = 0;
  virtual std::size_t OutputDim() const = 0;
  virtual SeqLayout OutputLayout(const SeqLayout &in) const { return in; }
  virtual ParamList Params() { return {}; }
  virtual Json Config() const { return Json{{"kind", std::string(LayerKindName(kind()))}}; }

  Matrix Forward(const Matrix &in, const SeqLayout &layout) {
    if (InputDim() != 0 && in.cols() != InputDim())
      throw ShapeError(StrCat(LayerKindName(kind()), ": input width ", in.cols(),
                              " != expected ", InputDim()));
    RequireShape(layout.Total() == in.rows(),
                 StrCat(LayerKindName(kind()), ": layout covers ", layout.Total(),
                        " rows but input has ", in.rows()));
    Matrix out = DoForward(in, layout);
    RequireFinite(out, StrCat(LayerKindName(kind()), " forward"));
    forward_done_ = true;
    return out;
  }

  Matrix Forward(const Matrix &in) { return Forward(in, SeqLayout::Single(in.rows())); }

  Matrix Backward(const Matrix &out_grad) {
    if (!forward_done_)
      throw Error(StrCat(LayerKindName(kind()), ": backward without forward"));
    forward_done_ = false;
    return DoBackward(out_grad);
  }

 protected:
  virtual Matrix DoForward(const Matrix &in, const SeqLayout &layout) = 0;
  virtual Matrix DoBackward(const Matrix &out_grad) = 0;

 private:
  bool forward_done_ = false;
};

/// A layer producing a scalar loss; Backward takes a 1x1 scale.
class LossLayer : public Layer {
 public:
  virtual double Loss() const = 0;
};

}  // namespace a2a
