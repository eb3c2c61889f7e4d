// a2a/numcore/attention.hpp

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
#include <vector>

#include "a2a/numcore/layers.hpp"

namespace a2a {

/// Scaled dot-product self-attention restricted to each segment.
/// Q, K, V and output projections are full dim x dim affines.
class MultiHeadAttention : public Layer {
 public:
  MultiHeadAttention(std::size_t dim, std::size_t heads)
      : dim_(dim), heads_(heads), q_(dim, dim), k_(dim, dim), v_(dim, dim), o_(dim, dim) {
    Require(heads > 0 && dim % heads == 0, "MultiHeadAttention: dim must divide by heads");
    const char *tags[] = {"q", "k", "v", "o"};
    Affine *projs[] = {&q_, &k_, &v_, &o_};
    for (int i = 0; i < 4; ++i) {
      projs[i]->weight().name = StrCat(tags[i], ".w");
      projs[i]->bias().name = StrCat(tags[i], ".b");
    }
  }

  void Init(Rng &rng) {
    q_.Init(rng);
    k_.Init(rng);
    v_.Init(rng);
    o_.Init(rng);
  }

  LayerKind kind() const override { return LayerKind::kMultiHeadAttention; }
  std::size_t InputDim() const override { return dim_; }
  std::size_t OutputDim() const override { return dim_; }
  ParamList Params() override {
    ParamList out;
    for (auto *a : {&q_, &k_, &v_, &o_})
      for (auto *p : a->Params()) out.push_back(p);
    return out;
  }
  Json Config() const override {
    return {{"kind", "MultiHeadAttention"}, {"dim", dim_}, {"heads", heads_}};
  }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &layout) override {
    layout_ = layout;
    q_mat_ = q_.Forward(in, layout);
    k_mat_ = k_.Forward(in, layout);
    v_mat_ = v_.Forward(in, layout);
    const std::size_t dh = dim_ / heads_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Matrix ctx(in.rows(), dim_);
    attn_.clear();
    std::size_t off = 0;
    for (auto len : layout.lengths) {
      for (std::size_t h = 0; h < heads_; ++h) {
        Matrix qh = q_mat_.RowRange(off, len).ColRange(h * dh, dh);
        Matrix kh = k_mat_.RowRange(off, len).ColRange(h * dh, dh);
        Matrix vh = v_mat_.RowRange(off, len).ColRange(h * dh, dh);
        Matrix a = MatMulBt(qh, kh);
        a *= scale;
        SoftmaxRowsInPlace(a);
        Matrix c = MatMul(a, vh);
        for (std::size_t t = 0; t < len; ++t)
          std::copy_n(c.Row(t).begin(), dh, ctx.Row(off + t).begin() + static_cast<long>(h * dh));
        attn_.push_back(std::move(a));
      }
      off += len;
    }
    return o_.Forward(ctx, layout);
  }

  Matrix DoBackward(const Matrix &grad) override {
    Matrix dctx = o_.Backward(grad);
    const std::size_t dh = dim_ / heads_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Matrix dq(grad.rows(), dim_), dk(grad.rows(), dim_), dv(grad.rows(), dim_);
    std::size_t off = 0, idx = 0;
    for (auto len : layout_.lengths) {
      for (std::size_t h = 0; h < heads_; ++h, ++idx) {
        const Matrix &a = attn_[idx];
        Matrix qh = q_mat_.RowRange(off, len).ColRange(h * dh, dh);
        Matrix kh = k_mat_.RowRange(off, len).ColRange(h * dh, dh);
        Matrix vh = v_mat_.RowRange(off, len).ColRange(h * dh, dh);
        Matrix dc = dctx.RowRange(off, len).ColRange(h * dh, dh);
        Matrix da = MatMulBt(dc, vh);
        Matrix dvh = MatMulAt(a, dc);
        // softmax backward, row-wise
        Matrix ds(len, len);
        for (std::size_t i = 0; i < len; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < len; ++j) dot += da(i, j) * a(i, j);
          for (std::size_t j = 0; j < len; ++j) ds(i, j) = a(i, j) * (da(i, j) - dot) * scale;
        }
        Matrix dqh = MatMul(ds, kh);
        Matrix dkh = MatMulAt(ds, qh);
        for (std::size_t t = 0; t < len; ++t)
          for (std::size_t c = 0; c < dh; ++c) {
            dq(off + t, h * dh + c) = dqh(t, c);
            dk(off + t, h * dh + c) = dkh(t, c);
            dv(off + t, h * dh + c) = dvh(t, c);
          }
      }
      off += len;
    }
    Matrix dx = q_.Backward(dq);
    dx += k_.Backward(dk);
    dx += v_.Backward(dv);
    return dx;
  }

 private:
  std::size_t dim_, heads_;
  Affine q_, k_, v_, o_;
  Matrix q_mat_, k_mat_, v_mat_;
  std::vector<Matrix> attn_;
  SeqLayout layout_;
};

}  // namespace a2a
