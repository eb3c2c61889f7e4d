// a2a/numcore/lstm.hpp

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

/// Unidirectional LSTM run over every segment of the input, all segments
/// advanced in lockstep. With `reverse` set each segment is read last frame
/// first; output row t is always aligned with input row t.
///
/// Gate layout along the 4H axis: input, forget, cell candidate, output.
/// No peepholes. Initial h and c are zero.
class LstmCell : public Layer {
 public:
  LstmCell(std::size_t in, std::size_t hidden, bool reverse = false)
      : in_(in), hidden_(hidden), reverse_(reverse),
        wx_("wx", Matrix(4 * hidden, in)), wh_("wh", Matrix(4 * hidden, hidden)),
        b_("b", Matrix(1, 4 * hidden)) {}

  /// Gaussian weights scaled by fan-in; forget-gate bias starts at 1.
  void Init(Rng &rng) {
    wx_.value = Matrix::Gaussian(4 * hidden_, in_, rng, 1.0 / std::sqrt(static_cast<double>(in_)));
    wh_.value = Matrix::Gaussian(4 * hidden_, hidden_, rng,
                                 1.0 / std::sqrt(static_cast<double>(hidden_)));
    b_.value.SetZero();
    for (std::size_t c = hidden_; c < 2 * hidden_; ++c) b_.value(0, c) = 1.0;
  }

  LayerKind kind() const override { return LayerKind::kLstmCell; }
  std::size_t InputDim() const override { return in_; }
  std::size_t OutputDim() const override { return hidden_; }
  ParamList Params() override { return {&wx_, &wh_, &b_}; }
  Json Config() const override {
    return {{"kind", "LstmCell"}, {"in", in_}, {"hidden", hidden_}, {"reverse", reverse_}};
  }
  bool reverse() const { return reverse_; }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &layout) override {
    const std::size_t n = in.rows(), H = hidden_;
    in_cache_ = in;
    layout_ = layout;
    Matrix pre = MatMulBt(in, wx_.value);
    AddRowVector(pre, b_.value);
    gates_ = Matrix(n, 4 * H);
    cell_ = Matrix(n, H);
    tanh_cell_ = Matrix(n, H);
    hid_ = Matrix(n, H);
    BuildSchedule(layout);

    for (std::size_t t = 0; t < steps_.size(); ++t) {
      const auto &rows = steps_[t];
      const auto &prev = prev_rows_[t];
      const std::size_t na = rows.size();
      Matrix hprev(na, H);
      if (t > 0)
        for (std::size_t a = 0; a < na; ++a)
          std::copy_n(hid_.Row(prev[a]).begin(), H, hprev.Row(a).begin());
      Matrix rec = MatMulBt(hprev, wh_.value);
      for (std::size_t a = 0; a < na; ++a) {
        const std::size_t r = rows[a];
        auto g = gates_.Row(r);
        auto p = pre.Row(r);
        auto q = rec.Row(a);
        for (std::size_t j = 0; j < H; ++j) {
          g[j] = Sigmoid(p[j] + q[j]);
          g[H + j] = Sigmoid(p[H + j] + q[H + j]);
          g[2 * H + j] = std::tanh(p[2 * H + j] + q[2 * H + j]);
          g[3 * H + j] = Sigmoid(p[3 * H + j] + q[3 * H + j]);
          const double cprev = t > 0 ? cell_(prev[a], j) : 0.0;
          const double c = g[H + j] * cprev + g[j] * g[2 * H + j];
          cell_(r, j) = c;
          tanh_cell_(r, j) = std::tanh(c);
          hid_(r, j) = g[3 * H + j] * tanh_cell_(r, j);
        }
      }
    }
    return hid_;
  }

  Matrix DoBackward(const Matrix &grad) override {
    RequireShape(grad.SameShape(hid_), "LstmCell backward: grad shape");
    const std::size_t n = grad.rows(), H = hidden_;
    Matrix dpre(n, 4 * H);
    Matrix dh_carry(n, H), dc_carry(n, H);  // indexed by the row receiving them
    for (std::size_t t = steps_.size(); t-- > 0;) {
      const auto &rows = steps_[t];
      const auto &prev = prev_rows_[t];
      const std::size_t na = rows.size();
      Matrix dg(na, 4 * H);
      for (std::size_t a = 0; a < na; ++a) {
        const std::size_t r = rows[a];
        auto g = gates_.Row(r);
        for (std::size_t j = 0; j < H; ++j) {
          const double dh = grad(r, j) + dh_carry(r, j);
          const double tc = tanh_cell_(r, j);
          const double dc = dc_carry(r, j) + dh * g[3 * H + j] * (1.0 - tc * tc);
          const double cprev = t > 0 ? cell_(prev[a], j) : 0.0;
          dg(a, j) = dc * g[2 * H + j] * g[j] * (1.0 - g[j]);
          dg(a, H + j) = dc * cprev * g[H + j] * (1.0 - g[H + j]);
          dg(a, 2 * H + j) = dc * g[j] * (1.0 - g[2 * H + j] * g[2 * H + j]);
          dg(a, 3 * H + j) = dh * tc * g[3 * H + j] * (1.0 - g[3 * H + j]);
          if (t > 0) dc_carry(prev[a], j) += dc * g[H + j];
        }
        std::copy_n(dg.Row(a).begin(), 4 * H, dpre.Row(r).begin());
      }
      if (t > 0) {
        Matrix hprev(na, H);
        for (std::size_t a = 0; a < na; ++a)
          std::copy_n(hid_.Row(prev[a]).begin(), H, hprev.Row(a).begin());
        AddMatMulAt(wh_.grad, dg, hprev);
        Matrix dhp = MatMul(dg, wh_.value);
        for (std::size_t a = 0; a < na; ++a)
          for (std::size_t j = 0; j < H; ++j) dh_carry(prev[a], j) += dhp(a, j);
      }
    }
    AddMatMulAt(wx_.grad, dpre, in_cache_);
    b_.grad += ColSums(dpre);
    return MatMul(dpre, wx_.value);
  }

 private:
  void BuildSchedule(const SeqLayout &layout) {
    std::size_t max_len = 0;
    for (auto l : layout.lengths) max_len = std::max(max_len, l);
    const auto offsets = layout.Offsets();
    steps_.assign(max_len, {});
    prev_rows_.assign(max_len, {});
    for (std::size_t t = 0; t < max_len; ++t)
      for (std::size_t s = 0; s < layout.NumSeqs(); ++s) {
        const std::size_t len = layout.lengths[s];
        if (t >= len) continue;
        auto row_at = [&](std::size_t step) {
          return offsets[s] + (reverse_ ? len - 1 - step : step);
        };
        steps_[t].push_back(row_at(t));
        prev_rows_[t].push_back(t > 0 ? row_at(t - 1) : 0);
      }
  }

  std::size_t in_, hidden_;
  bool reverse_;
  Param wx_, wh_, b_;
  Matrix in_cache_, gates_, cell_, tanh_cell_, hid_;
  SeqLayout layout_;
  std::vector<std::vector<std::size_t>> steps_, prev_rows_;
};

}  // namespace a2a
