// a2a/numcore/matrix.hpp

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

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>
#include <vector>

#include "a2a/numcore/common.hpp"
#include "a2a/numcore/rng.hpp"

namespace a2a {

/// Dense row-major matrix of doubles. Products go through Eigen maps.
class Matrix {
 public:
  using EigenMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<EigenMat>;
  using ConstMap = Eigen::Map<const EigenMat>;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    RequireShape(data_.size() == rows_ * cols_, "Matrix: data length != rows*cols");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto &r : rows) {
      RequireShape(r.size() == cols_, "Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix RowVector(std::span<const double> v) {
    return Matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
  }
  static Matrix Identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix Gaussian(std::size_t rows, std::size_t cols, Rng &rng, double sd = 1.0) {
    Matrix m(rows, cols);
    for (auto &x : m.data_) x = sd * rng.Gaussian();
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> Row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> Row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

  Map AsEigen() { return Map(data_.data(), Eigen::Index(rows_), Eigen::Index(cols_)); }
  ConstMap AsEigen() const {
    return ConstMap(data_.data(), Eigen::Index(rows_), Eigen::Index(cols_));
  }

  void SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }
  void Resize(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(rows * cols, 0.0);
  }

  bool SameShape(const Matrix &o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool AllFinite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  Matrix &operator+=(const Matrix &o) {
    RequireShape(SameShape(o), "Matrix +=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix &operator-=(const Matrix &o) {
    RequireShape(SameShape(o), "Matrix -=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix &operator*=(double s) {
    for (auto &x : data_) x *= s;
    return *this;
  }
  /// this += s * o
  void AddScaled(const Matrix &o, double s) {
    RequireShape(SameShape(o), "Matrix AddScaled: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
  }

  Matrix Transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// Columns [c0, c0 + n).
  Matrix ColRange(std::size_t c0, std::size_t n) const {
    RequireShape(c0 + n <= cols_, "Matrix ColRange out of range");
    Matrix out(rows_, n);
    for (std::size_t r = 0; r < rows_; ++r)
      std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_ + c0), n,
                  out.data_.begin() + static_cast<std::ptrdiff_t>(r * n));
    return out;
  }
  /// Rows [r0, r0 + n).
  Matrix RowRange(std::size_t r0, std::size_t n) const {
    RequireShape(r0 + n <= rows_, "Matrix RowRange out of range");
    return Matrix(n, cols_,
                  std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(r0 * cols_),
                                      data_.begin() + static_cast<std::ptrdiff_t>((r0 + n) * cols_)));
  }
  void SetColRange(std::size_t c0, const Matrix &src) {
    RequireShape(src.rows_ == rows_ && c0 + src.cols_ <= cols_, "Matrix SetColRange shape");
    for (std::size_t r = 0; r < rows_; ++r)
      std::copy_n(src.data_.begin() + static_cast<std::ptrdiff_t>(r * src.cols_), src.cols_,
                  data_.begin() + static_cast<std::ptrdiff_t>(r * cols_ + c0));
  }
  void AddColRange(std::size_t c0, const Matrix &src) {
    RequireShape(src.rows_ == rows_ && c0 + src.cols_ <= cols_, "Matrix AddColRange shape");
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < src.cols_; ++c) (*this)(r, c0 + c) += src(r, c);
  }

  double FrobeniusNorm() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
  }
  double Sum() const {
    double s = 0.0;
    for (double x : data_) s += x;
    return s;
  }
  double MaxAbs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  bool operator==(const Matrix &o) const { return SameShape(o) && data_ == o.data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator+(Matrix a, const Matrix &b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix &b) { return a -= b; }
inline Matrix operator*(Matrix a, double s) { return a *= s; }

/// a * b
inline Matrix MatMul(const Matrix &a, const Matrix &b) {
  RequireShape(a.cols() == b.rows(),
               StrCat("MatMul: ", a.rows(), "x", a.cols(), " * ", b.rows(), "x", b.cols()));
  Matrix out(a.rows(), b.cols());
  if (a.rows() && b.cols() && a.cols()) out.AsEigen().noalias() = a.AsEigen() * b.AsEigen();
  return out;
}

/// a * b^T
inline Matrix MatMulBt(const Matrix &a, const Matrix &b) {
  RequireShape(a.cols() == b.cols(),
               StrCat("MatMulBt: ", a.rows(), "x", a.cols(), " * (", b.rows(), "x", b.cols(), ")^T"));
  Matrix out(a.rows(), b.rows());
  if (a.rows() && b.rows() && a.cols())
    out.AsEigen().noalias() = a.AsEigen() * b.AsEigen().transpose();
  return out;
}

/// a^T * b
inline Matrix MatMulAt(const Matrix &a, const Matrix &b) {
  RequireShape(a.rows() == b.rows(),
               StrCat("MatMulAt: (", a.rows(), "x", a.cols(), ")^T * ", b.rows(), "x", b.cols()));
  Matrix out(a.cols(), b.cols());
  if (a.cols() && b.cols() && a.rows())
    out.AsEigen().noalias() = a.AsEigen().transpose() * b.AsEigen();
  return out;
}

/// acc += a^T * b, used for weight-gradient accumulation.
inline void AddMatMulAt(Matrix &acc, const Matrix &a, const Matrix &b) {
  RequireShape(a.rows() == b.rows() && acc.rows() == a.cols() && acc.cols() == b.cols(),
               "AddMatMulAt: shape mismatch");
  if (a.rows()) acc.AsEigen().noalias() += a.AsEigen().transpose() * b.AsEigen();
}

/// Elementwise product.
inline Matrix Hadamard(const Matrix &a, const Matrix &b) {
  RequireShape(a.SameShape(b), "Hadamard: shape mismatch");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

/// Adds a 1 x cols row vector to every row.
inline void AddRowVector(Matrix &m, const Matrix &row) {
  RequireShape(row.rows() == 1 && row.cols() == m.cols(), "AddRowVector: shape mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) += row(0, c);
}

/// 1 x cols column sums.
inline Matrix ColSums(const Matrix &m) {
  Matrix s(1, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) s(0, c) += m(r, c);
  return s;
}

inline Matrix HConcat(const Matrix &a, const Matrix &b) {
  RequireShape(a.rows() == b.rows(), "HConcat: row mismatch");
  Matrix out(a.rows(), a.cols() + b.cols());
  out.SetColRange(0, a);
  out.SetColRange(a.cols(), b);
  return out;
}

inline Matrix VConcat(const std::vector<const Matrix *> &parts) {
  if (parts.empty()) return {};
  const std::size_t cols = parts.front()->cols();
  std::size_t rows = 0;
  for (const auto *p : parts) {
    RequireShape(p->cols() == cols, "VConcat: column mismatch");
    rows += p->rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto *p : parts) data.insert(data.end(), p->data().begin(), p->data().end());
  return Matrix(rows, cols, std::move(data));
}

inline void RequireFinite(const Matrix &m, const std::string &where) {
  if (!m.AllFinite()) throw NumericError(where + ": non-finite value");
}

}  // namespace a2a
