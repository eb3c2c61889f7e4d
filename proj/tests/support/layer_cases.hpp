// tests/support/layer_cases.hpp

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

// Randomized probe stacks, one per layer kind, shared by the unit and
// acceptance gradient suites. Each probe is [layer under test, Affine, SoftmaxCE]
// with random targets so every layer output feeds a scalar loss.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "a2a/numcore.hpp"

namespace a2a::testing {

struct ProbeCase {
  std::string label;
  LayerStack stack;
  Matrix input;
  SeqLayout layout;
};

inline void RandomizeParams(LayerStack &s, Rng &rng, double sd = 0.5) {
  for (auto *p : s.Params())
    for (auto &x : p->value.data()) x = sd * rng.Gaussian();
}

inline SeqLayout RandomLayout(Rng &rng, std::size_t max_segs, std::size_t min_len, std::size_t max_len) {
  SeqLayout l;
  const auto n = static_cast<std::size_t>(rng.UniformInt(1, static_cast<std::int64_t>(max_segs)));
  for (std::size_t i = 0; i < n; ++i)
    l.lengths.push_back(static_cast<std::size_t>(
        rng.UniformInt(static_cast<std::int64_t>(min_len), static_cast<std::int64_t>(max_len))));
  return l;
}

inline ProbeCase MakeProbe(LayerKind kind, Rng &rng) {
  ProbeCase pc;
  auto dim = [&](int lo, int hi) { return static_cast<std::size_t>(rng.UniformInt(lo, hi)); };
  std::size_t in = dim(2, 6);
  pc.layout = RandomLayout(rng, 3, 1, 5);
  std::size_t out = in;
  bool randomize = true;
  switch (kind) {
    case LayerKind::kAffine:
      out = dim(2, 6);
      pc.stack.Emplace<Affine>(in, out, rng.Uniform() < 0.8);
      break;
    case LayerKind::kRelu:
      pc.stack.Emplace<Relu>(in);
      break;
    case LayerKind::kSigmoid:
      pc.stack.Emplace<SigmoidLayer>(in);
      break;
    case LayerKind::kTanh:
      pc.stack.Emplace<TanhLayer>(in);
      break;
    case LayerKind::kLayerNorm:
      in = dim(3, 6);
      out = in;
      pc.stack.Emplace<LayerNorm>(in);
      break;
    case LayerKind::kSoftmaxCe:
      break;
    case LayerKind::kLstmCell:
      out = dim(2, 5);
      pc.stack.Emplace<LstmCell>(in, out, rng.Uniform() < 0.5);
      break;
    case LayerKind::kTimeSplice: {
      std::vector<int> offs{-1, 0, 2};
      const std::size_t stride = rng.Uniform() < 0.5 ? 1 : 2;
      out = in * offs.size();
      pc.stack.Emplace<TimeSplice>(in, offs, stride);
      break;
    }
    case LayerKind::kTdnnfBlock:
      in = dim(3, 6);
      out = in;
      pc.stack.Emplace<TdnnfBlock>(in, dim(2, 4));
      break;
    case LayerKind::kMultiHeadAttention: {
      const std::size_t heads = dim(1, 2);
      in = heads * dim(2, 3);
      out = in;
      pc.stack.Emplace<MultiHeadAttention>(in, heads);
      break;
    }
    case LayerKind::kDepthwiseConvTime:
      pc.stack.Emplace<DepthwiseConvTime>(in, 2 * dim(0, 2) + 1);
      break;
    case LayerKind::kLhucScale: {
      auto &l = pc.stack.Emplace<LhucScale>(in, 2);
      std::vector<std::size_t> slots;
      for (std::size_t i = 0; i < pc.layout.Total(); ++i) slots.push_back(i % 2);
      l.SetSlots(slots);
      break;
    }
  }
  const std::size_t classes = dim(2, 5);
  pc.stack.Emplace<Affine>(out, classes);
  pc.stack.Emplace<SoftmaxCe>(classes);
  if (randomize) RandomizeParams(pc.stack, rng);

  SeqLayout out_layout = pc.layout;
  if (kind == LayerKind::kTimeSplice) out_layout = pc.stack.at(0).OutputLayout(pc.layout);
  std::vector<int> targets;
  for (std::size_t i = 0; i < out_layout.Total(); ++i)
    targets.push_back(static_cast<int>(rng.UniformInt(0, static_cast<std::int64_t>(classes) - 1)));
  dynamic_cast<SoftmaxCe &>(pc.stack.back()).SetTargets(targets);
  pc.input = Matrix::Gaussian(pc.layout.Total(), in, rng);
  pc.label = std::string(LayerKindName(kind));
  return pc;
}

inline const std::vector<LayerKind> &AllLayerKinds() {
  static const std::vector<LayerKind> kinds{
      LayerKind::kAffine,    LayerKind::kRelu,       LayerKind::kSigmoid,
      LayerKind::kTanh,      LayerKind::kLayerNorm,  LayerKind::kSoftmaxCe,
      LayerKind::kLstmCell,  LayerKind::kTimeSplice, LayerKind::kTdnnfBlock,
      LayerKind::kMultiHeadAttention, LayerKind::kDepthwiseConvTime, LayerKind::kLhucScale};
  return kinds;
}

}  // namespace a2a::testing
