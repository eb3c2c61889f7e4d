// a2a/featex/dct.hpp

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
#include <numbers>

#include "a2a/numcore/matrix.hpp"

namespace a2a::featex {

/// Orthonormal DCT-II matrix: D(k, n) = a_k cos(pi (2n + 1) k / 2N),
/// a_0 = sqrt(1/N), a_k = sqrt(2/N).
inline Matrix DctMatrix(std::size_t n) {
  Require(n > 0, "DctMatrix: empty size");
  Matrix d(n, n);
  const double N = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::sqrt((k == 0 ? 1.0 : 2.0) / N);
    for (std::size_t i = 0; i < n; ++i)
      d(k, i) = a * std::cos(std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) * static_cast<double>(k) / (2.0 * N));
  }
  return d;
}

/// Bilinear resize with pixel centres aligned at the corners.
inline Matrix ResizeBilinear(const Matrix &img, std::size_t rows, std::size_t cols) {
  RequireShape(img.rows() > 0 && img.cols() > 0 && rows > 0 && cols > 0, "ResizeBilinear: empty image");
  if (img.rows() == rows && img.cols() == cols) return img;
  Matrix out(rows, cols);
  auto scale = [](std::size_t from, std::size_t to) {
    return to > 1 ? static_cast<double>(from - 1) / static_cast<double>(to - 1) : 0.0;
  };
  const double sr = scale(img.rows(), rows), sc = scale(img.cols(), cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = static_cast<double>(r) * sr;
    const auto y0 = static_cast<std::size_t>(y);
    const std::size_t y1 = std::min(y0 + 1, img.rows() - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = static_cast<double>(c) * sc;
      const auto x0 = static_cast<std::size_t>(x);
      const std::size_t x1 = std::min(x0 + 1, img.cols() - 1);
      const double fx = x - static_cast<double>(x0);
      out(r, c) = (1 - fy) * ((1 - fx) * img(y0, x0) + fx * img(y0, x1)) + fy * ((1 - fx) * img(y1, x0) + fx * img(y1, x1));
    }
  }
  return out;
}

/// Truncated 2-D DCT codec. Encoding keeps the top-left kept x kept block of
/// D F D^T, flattened row-major; decoding zero-pads the rest.
class DctCodec {
 public:
  explicit DctCodec(std::size_t size = 64, std::size_t kept = 12) : size_(size), kept_(kept) {
    Require(kept > 0 && kept <= size, "DctCodec: kept must be in [1, size]");
    basis_ = DctMatrix(size).RowRange(0, kept);
  }

  std::size_t size() const { return size_; }
  std::size_t kept() const { return kept_; }
  std::size_t dim() const { return kept_ * kept_; }

  Matrix Encode(const Matrix &frame) const {
    RequireShape(frame.rows() == size_ && frame.cols() == size_,
                 StrCat("DctCodec::Encode: expected ", size_, "x", size_, " frame, got ", frame.rows(), "x",
                        frame.cols()));
    Matrix c = MatMulBt(MatMul(basis_, frame), basis_);
    return Matrix(1, dim(), std::vector<double>(c.data()));
  }

  Matrix Decode(const Matrix &coeffs) const {
    RequireShape(coeffs.size() == dim(), StrCat("DctCodec::Decode: expected ", dim(), " coefficients, got ", coeffs.size()));
    Matrix c(kept_, kept_, std::vector<double>(coeffs.data()));
    return MatMul(MatMulAt(basis_, c), basis_);
  }

  /// Encodes a sequence of frames into a T x dim matrix.
  Matrix EncodeSequence(const std::vector<Matrix> &frames) const {
    Matrix out(frames.size(), dim());
    for (std::size_t t = 0; t < frames.size(); ++t) {
      Matrix c = Encode(frames[t]);
      std::copy(c.data().begin(), c.data().end(), out.Row(t).begin());
    }
    return out;
  }

 private:
  std::size_t size_, kept_;
  Matrix basis_;  // kept x size
};

}  // namespace a2a::featex
