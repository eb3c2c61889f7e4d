// a2a/numcore/layers.hpp

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

// Stateless and frame-local layers: Affine, the pointwise nonlinearities,
// LayerNorm, SoftmaxCE, TimeSplice, DepthwiseConvTime and LhucScale.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "a2a/numcore/layer.hpp"

namespace a2a {

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// y = x W^T + b, W stored out x in.
class Affine : public Layer {
 public:
  Affine(std::size_t in, std::size_t out, bool bias = true)
      : in_(in), out_(out), has_bias_(bias),
        w_("w", Matrix(out, in)), b_("b", Matrix(1, bias ? out : 0)) {}

  /// Glorot-style gaussian init, sd = sqrt(1/in) * gain.
  void Init(Rng &rng, double gain = 1.0) {
    w_.value = Matrix::Gaussian(out_, in_, rng, gain / std::sqrt(static_cast<double>(in_)));
    b_.value.SetZero();
  }

  LayerKind kind() const override { return LayerKind::kAffine; }
  std::size_t InputDim() const override { return in_; }
  std::size_t OutputDim() const override { return out_; }
  ParamList Params() override {
    if (has_bias_) return {&w_, &b_};
    return {&w_};
  }
  Json Config() const override {
    return {{"kind", "Affine"}, {"in", in_}, {"out", out_}, {"bias", has_bias_}};
  }

  Param &weight() { return w_; }
  Param &bias() { return b_; }
  const Param &weight() const { return w_; }
  bool has_bias() const { return has_bias_; }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &) override {
    in_cache_ = in;
    Matrix out = MatMulBt(in, w_.value);
    if (has_bias_) AddRowVector(out, b_.value);
    return out;
  }
  Matrix DoBackward(const Matrix &g) override {
    RequireShape(g.rows() == in_cache_.rows() && g.cols() == out_, "Affine backward: grad shape");
    AddMatMulAt(w_.grad, g, in_cache_);
    if (has_bias_) b_.grad += ColSums(g);
    return MatMul(g, w_.value);
  }

 private:
  std::size_t in_, out_;
  bool has_bias_;
  Param w_, b_;
  Matrix in_cache_;
};

/// Shared shape handling for elementwise nonlinearities.
class PointwiseLayer : public Layer {
 public:
  explicit PointwiseLayer(std::size_t dim) : dim_(dim) {}
  std::size_t InputDim() const override { return dim_; }
  std::size_t OutputDim() const override { return dim_; }
  Json Config() const override {
    return {{"kind", std::string(LayerKindName(kind()))}, {"dim", dim_}};
  }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &) override {
    Matrix out(in.rows(), in.cols());
    for (std::size_t i = 0; i < in.size(); ++i) out.data()[i] = F(in.data()[i]);
    out_cache_ = out;
    in_cache_ = in;
    return out;
  }
  Matrix DoBackward(const Matrix &g) override {
    RequireShape(g.SameShape(out_cache_), "pointwise backward: grad shape");
    Matrix dx(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i)
      dx.data()[i] = g.data()[i] * DF(in_cache_.data()[i], out_cache_.data()[i]);
    return dx;
  }
  virtual double F(double x) const = 0;
  /// Derivative given input x and output y.
  virtual double DF(double x, double y) const = 0;

 private:
  std::size_t dim_;
  Matrix in_cache_, out_cache_;
};

class Relu : public PointwiseLayer {
 public:
  using PointwiseLayer::PointwiseLayer;
  LayerKind kind() const override { return LayerKind::kRelu; }

 protected:
  double F(double x) const override { return x > 0 ? x : 0.0; }
  double DF(double x, double) const override { return x > 0 ? 1.0 : 0.0; }
};

class SigmoidLayer : public PointwiseLayer {
 public:
  using PointwiseLayer::PointwiseLayer;
  LayerKind kind() const override { return LayerKind::kSigmoid; }

 protected:
  double F(double x) const override { return Sigmoid(x); }
  double DF(double, double y) const override { return y * (1.0 - y); }
};

class TanhLayer : public PointwiseLayer {
 public:
  using PointwiseLayer::PointwiseLayer;
  LayerKind kind() const override { return LayerKind::kTanh; }

 protected:
  double F(double x) const override { return std::tanh(x); }
  double DF(double, double y) const override { return 1.0 - y * y; }
};

/// Per-row normalization with learned gain and offset.
class LayerNorm : public Layer {
 public:
  explicit LayerNorm(std::size_t dim, double eps = 1e-5)
      : dim_(dim), eps_(eps), gain_("gain", Matrix(1, dim, 1.0)), bias_("bias", Matrix(1, dim)) {}

  LayerKind kind() const override { return LayerKind::kLayerNorm; }
  std::size_t InputDim() const override { return dim_; }
  std::size_t OutputDim() const override { return dim_; }
  ParamList Params() override { return {&gain_, &bias_}; }
  Json Config() const override { return {{"kind", "LayerNorm"}, {"dim", dim_}, {"eps", eps_}}; }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &) override {
    const std::size_t n = in.rows();
    xhat_ = Matrix(n, dim_);
    inv_sd_.assign(n, 0.0);
    Matrix out(n, dim_);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = in.Row(r);
      double mean = 0.0;
      for (double x : row) mean += x;
      mean /= static_cast<double>(dim_);
      double var = 0.0;
      for (double x : row) var += (x - mean) * (x - mean);
      var /= static_cast<double>(dim_);
      const double is = 1.0 / std::sqrt(var + eps_);
      inv_sd_[r] = is;
      for (std::size_t c = 0; c < dim_; ++c) {
        const double xh = (row[c] - mean) * is;
        xhat_(r, c) = xh;
        out(r, c) = gain_.value(0, c) * xh + bias_.value(0, c);
      }
    }
    return out;
  }
  Matrix DoBackward(const Matrix &g) override {
    RequireShape(g.SameShape(xhat_), "LayerNorm backward: grad shape");
    const std::size_t n = g.rows();
    const double d = static_cast<double>(dim_);
    Matrix dx(n, dim_);
    for (std::size_t r = 0; r < n; ++r) {
      double sum_dxh = 0.0, sum_dxh_xh = 0.0;
      for (std::size_t c = 0; c < dim_; ++c) {
        gain_.grad(0, c) += g(r, c) * xhat_(r, c);
        bias_.grad(0, c) += g(r, c);
        const double dxh = g(r, c) * gain_.value(0, c);
        sum_dxh += dxh;
        sum_dxh_xh += dxh * xhat_(r, c);
      }
      for (std::size_t c = 0; c < dim_; ++c) {
        const double dxh = g(r, c) * gain_.value(0, c);
        dx(r, c) = inv_sd_[r] / d * (d * dxh - sum_dxh - xhat_(r, c) * sum_dxh_xh);
      }
    }
    return dx;
  }

 private:
  std::size_t dim_;
  double eps_;
  Param gain_, bias_;
  Matrix xhat_;
  std::vector<double> inv_sd_;
};

inline void SoftmaxRowsInPlace(Matrix &m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.Row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double &x : row) {
      x = std::exp(x - mx);
      s += x;
    }
    for (double &x : row) x /= s;
  }
}

inline void LogSoftmaxRowsInPlace(Matrix &m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.Row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double x : row) s += std::exp(x - mx);
    const double lse = mx + std::log(s);
    for (double &x : row) x -= lse;
  }
}

/// Softmax output with mean frame cross-entropy against integer targets.
/// Forward returns the posteriors; Loss() is valid once targets are set.
class SoftmaxCe : public LossLayer {
 public:
  explicit SoftmaxCe(std::size_t dim) : dim_(dim) {}

  LayerKind kind() const override { return LayerKind::kSoftmaxCe; }
  std::size_t InputDim() const override { return dim_; }
  std::size_t OutputDim() const override { return dim_; }
  Json Config() const override { return {{"kind", "SoftmaxCE"}, {"dim", dim_}}; }

  void SetTargets(std::vector<int> targets) { targets_ = std::move(targets); }
  const std::vector<int> &targets() const { return targets_; }

  double Loss() const override {
    RequireShape(targets_.size() == probs_.rows(), "SoftmaxCE: targets/rows mismatch");
    double loss = 0.0;
    for (std::size_t r = 0; r < probs_.rows(); ++r)
      loss -= std::log(std::max(probs_(r, static_cast<std::size_t>(targets_[r])), 1e-300));
    return loss / static_cast<double>(std::max<std::size_t>(probs_.rows(), 1));
  }

  const Matrix &posteriors() const { return probs_; }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &) override {
    probs_ = in;
    SoftmaxRowsInPlace(probs_);
    return probs_;
  }
  Matrix DoBackward(const Matrix &g) override {
    RequireShape(targets_.size() == probs_.rows(), "SoftmaxCE: targets/rows mismatch");
    const double scale = (g.size() == 1 ? g(0, 0) : 1.0) /
                         static_cast<double>(std::max<std::size_t>(probs_.rows(), 1));
    Matrix dx = probs_;
    for (std::size_t r = 0; r < dx.rows(); ++r) {
      const auto t = static_cast<std::size_t>(targets_[r]);
      RequireShape(t < dim_, "SoftmaxCE: target out of range");
      dx(r, t) -= 1.0;
    }
    dx *= scale;
    return dx;
  }

 private:
  std::size_t dim_;
  std::vector<int> targets_;
  Matrix probs_;
};

/// Concatenates frames at the given offsets, optionally subsampling by
/// `stride`. Boundary frames are replicated within each segment.
class TimeSplice : public Layer {
 public:
  TimeSplice(std::size_t dim, std::vector<int> offsets, std::size_t stride = 1)
      : dim_(dim), offsets_(std::move(offsets)), stride_(stride) {
    Require(!offsets_.empty() && stride_ >= 1, "TimeSplice: bad config");
  }

  LayerKind kind() const override { return LayerKind::kTimeSplice; }
  std::size_t InputDim() const override { return dim_; }
  std::size_t OutputDim() const override { return dim_ * offsets_.size(); }
  SeqLayout OutputLayout(const SeqLayout &in) const override {
    SeqLayout out;
    for (auto l : in.lengths) out.lengths.push_back((l + stride_ - 1) / stride_);
    return out;
  }
  Json Config() const override {
    return {{"kind", "TimeSplice"}, {"dim", dim_}, {"offsets", offsets_}, {"stride", stride_}};
  }
  const std::vector<int> &offsets() const { return offsets_; }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &layout) override {
    in_rows_ = in.rows();
    const SeqLayout out_layout = OutputLayout(layout);
    Matrix out(out_layout.Total(), OutputDim());
    src_.assign(out.rows() * offsets_.size(), 0);
    std::size_t in_off = 0, out_row = 0;
    for (std::size_t s = 0; s < layout.NumSeqs(); ++s) {
      const auto len = static_cast<long>(layout.lengths[s]);
      for (std::size_t j = 0; j < out_layout.lengths[s]; ++j, ++out_row) {
        const long t = static_cast<long>(j * stride_);
        for (std::size_t k = 0; k < offsets_.size(); ++k) {
          const long src_t = std::clamp(t + offsets_[k], 0L, len - 1);
          const std::size_t src = in_off + static_cast<std::size_t>(src_t);
          src_[out_row * offsets_.size() + k] = src;
          std::copy_n(in.Row(src).begin(), dim_, out.Row(out_row).begin() + static_cast<long>(k * dim_));
        }
      }
      in_off += layout.lengths[s];
    }
    return out;
  }
  Matrix DoBackward(const Matrix &g) override {
    RequireShape(g.cols() == OutputDim() && g.rows() * offsets_.size() == src_.size(),
                 "TimeSplice backward: grad shape");
    Matrix dx(in_rows_, dim_);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t k = 0; k < offsets_.size(); ++k) {
        auto dst = dx.Row(src_[r * offsets_.size() + k]);
        for (std::size_t c = 0; c < dim_; ++c) dst[c] += g(r, k * dim_ + c);
      }
    return dx;
  }

 private:
  std::size_t dim_;
  std::vector<int> offsets_;
  std::size_t stride_;
  std::size_t in_rows_ = 0;
  std::vector<std::size_t> src_;
};

/// Per-channel convolution along time with "same" zero padding inside each
/// segment. Weights are kernel x dim.
class DepthwiseConvTime : public Layer {
 public:
  DepthwiseConvTime(std::size_t dim, std::size_t kernel)
      : dim_(dim), kernel_(kernel), w_("w", Matrix(kernel, dim)), b_("b", Matrix(1, dim)) {
    Require(kernel % 2 == 1, "DepthwiseConvTime: kernel must be odd");
  }

  void Init(Rng &rng) {
    w_.value = Matrix::Gaussian(kernel_, dim_, rng, 1.0 / std::sqrt(static_cast<double>(kernel_)));
    b_.value.SetZero();
  }

  LayerKind kind() const override { return LayerKind::kDepthwiseConvTime; }
  std::size_t InputDim() const override { return dim_; }
  std::size_t OutputDim() const override { return dim_; }
  ParamList Params() override { return {&w_, &b_}; }
  Json Config() const override {
    return {{"kind", "DepthwiseConvTime"}, {"dim", dim_}, {"kernel", kernel_}};
  }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &layout) override {
    in_cache_ = in;
    layout_ = layout;
    Matrix out(in.rows(), dim_);
    const long half = static_cast<long>(kernel_ / 2);
    std::size_t off = 0;
    for (auto len : layout.lengths) {
      for (long t = 0; t < static_cast<long>(len); ++t) {
        auto o = out.Row(off + static_cast<std::size_t>(t));
        for (std::size_t c = 0; c < dim_; ++c) o[c] = b_.value(0, c);
        for (long k = 0; k < static_cast<long>(kernel_); ++k) {
          const long src = t + k - half;
          if (src < 0 || src >= static_cast<long>(len)) continue;
          auto x = in.Row(off + static_cast<std::size_t>(src));
          auto w = w_.value.Row(static_cast<std::size_t>(k));
          for (std::size_t c = 0; c < dim_; ++c) o[c] += w[c] * x[c];
        }
      }
      off += len;
    }
    return out;
  }
  Matrix DoBackward(const Matrix &g) override {
    RequireShape(g.SameShape(in_cache_), "DepthwiseConvTime backward: grad shape");
    Matrix dx(g.rows(), dim_);
    const long half = static_cast<long>(kernel_ / 2);
    b_.grad += ColSums(g);
    std::size_t off = 0;
    for (auto len : layout_.lengths) {
      for (long t = 0; t < static_cast<long>(len); ++t) {
        auto go = g.Row(off + static_cast<std::size_t>(t));
        for (long k = 0; k < static_cast<long>(kernel_); ++k) {
          const long src = t + k - half;
          if (src < 0 || src >= static_cast<long>(len)) continue;
          const auto srow = off + static_cast<std::size_t>(src);
          auto x = in_cache_.Row(srow);
          auto dxr = dx.Row(srow);
          auto w = w_.value.Row(static_cast<std::size_t>(k));
          auto dw = w_.grad.Row(static_cast<std::size_t>(k));
          for (std::size_t c = 0; c < dim_; ++c) {
            dw[c] += go[c] * x[c];
            dxr[c] += go[c] * w[c];
          }
        }
      }
      off += len;
    }
    return dx;
  }

 private:
  std::size_t dim_, kernel_;
  Param w_, b_;
  Matrix in_cache_;
  SeqLayout layout_;
};

/// Learning hidden unit contributions: y = x * 2 sigmoid(alpha[slot(row)]).
/// Row slots default to 0; alpha = 0 gives the exact identity.
class LhucScale : public Layer {
 public:
  LhucScale(std::size_t dim, std::size_t num_slots = 1)
      : dim_(dim), alpha_("alpha", Matrix(num_slots, dim)) {}

  LayerKind kind() const override { return LayerKind::kLhucScale; }
  std::size_t InputDim() const override { return dim_; }
  std::size_t OutputDim() const override { return dim_; }
  ParamList Params() override { return {&alpha_}; }
  Json Config() const override {
    return {{"kind", "LhucScale"}, {"dim", dim_}, {"slots", alpha_.value.rows()}};
  }

  Param &alpha() { return alpha_; }
  std::size_t num_slots() const { return alpha_.value.rows(); }
  /// Per-row slot assignment for the next forward; empty means all slot 0.
  void SetSlots(std::vector<std::size_t> slots) { slots_ = std::move(slots); }

 protected:
  Matrix DoForward(const Matrix &in, const SeqLayout &) override {
    RequireShape(slots_.empty() || slots_.size() == in.rows(), "LhucScale: slot count mismatch");
    in_cache_ = in;
    used_slots_ = slots_;
    Matrix out(in.rows(), dim_);
    for (std::size_t r = 0; r < in.rows(); ++r) {
      const std::size_t s = slots_.empty() ? 0 : slots_[r];
      RequireShape(s < num_slots(), "LhucScale: slot out of range");
      for (std::size_t c = 0; c < dim_; ++c)
        out(r, c) = in(r, c) * (2.0 * Sigmoid(alpha_.value(s, c)));
    }
    return out;
  }
  Matrix DoBackward(const Matrix &g) override {
    RequireShape(g.SameShape(in_cache_), "LhucScale backward: grad shape");
    Matrix dx(g.rows(), dim_);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      const std::size_t s = used_slots_.empty() ? 0 : used_slots_[r];
      for (std::size_t c = 0; c < dim_; ++c) {
        const double sg = Sigmoid(alpha_.value(s, c));
        dx(r, c) = g(r, c) * 2.0 * sg;
        alpha_.grad(s, c) += g(r, c) * in_cache_(r, c) * 2.0 * sg * (1.0 - sg);
      }
    }
    return dx;
  }

 private:
  std::size_t dim_;
  Param alpha_;
  std::vector<std::size_t> slots_, used_slots_;
  Matrix in_cache_;
};

}  // namespace a2a
