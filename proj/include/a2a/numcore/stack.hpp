// a2a/numcore/stack.hpp

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
#include <vector>

#include "a2a/numcore/attention.hpp"
#include "a2a/numcore/layers.hpp"
#include "a2a/numcore/lstm.hpp"
#include "a2a/numcore/tdnnf.hpp"

namespace a2a {

/// Builds an (uninitialized) layer from its Config() json.
inline std::unique_ptr<Layer> MakeLayer(const Json &cfg) {
  const std::string kind = cfg.at("kind").get<std::string>();
  auto dim = [&](const char *k) { return cfg.at(k).get<std::size_t>(); };
  if (kind == "Affine") return std::make_unique<Affine>(dim("in"), dim("out"), cfg.value("bias", true));
  if (kind == "ReLU") return std::make_unique<Relu>(dim("dim"));
  if (kind == "Sigmoid") return std::make_unique<SigmoidLayer>(dim("dim"));
  if (kind == "Tanh") return std::make_unique<TanhLayer>(dim("dim"));
  if (kind == "LayerNorm") return std::make_unique<LayerNorm>(dim("dim"), cfg.value("eps", 1e-5));
  if (kind == "SoftmaxCE") return std::make_unique<SoftmaxCe>(dim("dim"));
  if (kind == "LstmCell")
    return std::make_unique<LstmCell>(dim("in"), dim("hidden"), cfg.value("reverse", false));
  if (kind == "TimeSplice")
    return std::make_unique<TimeSplice>(dim("dim"), cfg.at("offsets").get<std::vector<int>>(),
                                        cfg.value("stride", std::size_t{1}));
  if (kind == "TdnnfBlock")
    return std::make_unique<TdnnfBlock>(dim("dim"), dim("bottleneck"), cfg.value("bypass", 0.66));
  if (kind == "MultiHeadAttention") return std::make_unique<MultiHeadAttention>(dim("dim"), dim("heads"));
  if (kind == "DepthwiseConvTime") return std::make_unique<DepthwiseConvTime>(dim("dim"), dim("kernel"));
  if (kind == "LhucScale") return std::make_unique<LhucScale>(dim("dim"), cfg.value("slots", std::size_t{1}));
  throw Error("MakeLayer: unknown kind " + kind);
}

/// Ordered list of layers applied in sequence.
class LayerStack {
 public:
  LayerStack() = default;
  LayerStack(LayerStack &&) = default;
  LayerStack &operator=(LayerStack &&) = default;

  template <typename L>
  L &Add(std::unique_ptr<L> layer) {
    L &ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }
  template <typename L, typename... Args>
  L &Emplace(Args &&...args) {
    return Add(std::make_unique<L>(std::forward<Args>(args)...));
  }

  std::size_t size() const { return layers_.size(); }
  Layer &at(std::size_t i) { return *layers_.at(i); }
  const Layer &at(std::size_t i) const { return *layers_.at(i); }
  Layer &back() { return *layers_.back(); }

  LossLayer *loss_layer() { return layers_.empty() ? nullptr : dynamic_cast<LossLayer *>(layers_.back().get()); }

  Matrix Forward(const Matrix &in, const SeqLayout &layout) {
    Matrix x = in;
    SeqLayout l = layout;
    for (auto &layer : layers_) {
      x = layer->Forward(x, l);
      l = layer->OutputLayout(l);
    }
    return x;
  }
  Matrix Forward(const Matrix &in) { return Forward(in, SeqLayout::Single(in.rows())); }

  Matrix Backward(const Matrix &grad) {
    Matrix g = grad;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->Backward(g);
    return g;
  }

  /// Parameters with names prefixed by layer index ("3.w").
  ParamList Params() {
    ParamList out;
    const bool rename = !named_;
    named_ = true;
    for (std::size_t i = 0; i < layers_.size(); ++i) AppendPrefixed(out, layers_[i]->Params(), StrCat(i, "."), rename);
    return out;
  }

  Json Config() const {
    Json arr = Json::array();
    for (const auto &l : layers_) arr.push_back(l->Config());
    return arr;
  }

  static LayerStack FromConfig(const Json &cfg) {
    LayerStack s;
    for (const auto &c : cfg) s.layers_.push_back(MakeLayer(c));
    return s;
  }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  bool named_ = false;
};

}  // namespace a2a
