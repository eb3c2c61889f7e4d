// a2a/numcore/semiorth.hpp

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

#include "a2a/numcore/matrix.hpp"

namespace a2a {

/// ||B B^T - I||_F
inline double SemiOrthogonalDefect(const Matrix &b) {
  Matrix p = MatMulBt(b, b);
  for (std::size_t i = 0; i < p.rows(); ++i) p(i, i) -= 1.0;
  return p.FrobeniusNorm();
}

/// One step of B <- B - 1/2 (B B^T - I) B. Semi-orthogonal rows are a fixed
/// point; singular values in (0, sqrt(3)) are pulled toward 1.
inline Matrix SemiOrthogonalStep(const Matrix &b) {
  if (b.rows() > b.cols())
    throw ShapeError(StrCat("SemiOrthogonalStep: rows ", b.rows(), " > cols ", b.cols()));
  Matrix p = MatMulBt(b, b);
  for (std::size_t i = 0; i < p.rows(); ++i) p(i, i) -= 1.0;
  Matrix out = b;
  out.AddScaled(MatMul(p, b), -0.5);
  return out;
}

/// Repeats the step until the defect drops below `tol` or `max_iter` runs out.
/// Returns the final defect.
inline double ConstrainSemiOrthogonal(Matrix &b, double tol, int max_iter) {
  double d = SemiOrthogonalDefect(b);
  for (int i = 0; i < max_iter && d >= tol; ++i) {
    b = SemiOrthogonalStep(b);
    d = SemiOrthogonalDefect(b);
  }
  return d;
}

}  // namespace a2a
