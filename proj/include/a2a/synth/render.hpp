// a2a/synth/render.hpp

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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "a2a/synth/world.hpp"

namespace a2a::synth {

inline constexpr std::size_t kFrameSize = 64;

struct RenderConfig {
  double mid_row = 32.0;
  double amplitude = 6.0;  // pixels per unit weight
  double sigma = 2.5;      // ridge half-width, pixels
  double speckle = 0.1;    // additive gaussian sd before clipping
};

/// Basis shapes over x in [0, 1]: constant, tilt, bow, S-curve.
inline double BasisShape(std::size_t i, double x) {
  if (i == 0) return 1.0;
  return std::cos(static_cast<double>(i) * std::numbers::pi * x);
}

/// Tongue contour row position for each of the 64 columns.
inline std::array<double, kFrameSize> Contour(const ArtVec &w, const RenderConfig &cfg = {}) {
  std::array<double, kFrameSize> y{};
  for (std::size_t col = 0; col < kFrameSize; ++col) {
    const double x = static_cast<double>(col) / (kFrameSize - 1);
    double s = 0.0;
    for (std::size_t i = 0; i < kArtDim; ++i) s += w[i] * BasisShape(i, x);
    y[col] = cfg.mid_row + cfg.amplitude * s;
  }
  return y;
}

/// Pseudo B-mode frame: a gaussian ridge along the contour plus speckle,
/// clipped to [0, 1]. Speckle is drawn row-major, one gaussian per pixel.
inline Matrix RenderFrame(const ArtVec &w, Rng &rng, const RenderConfig &cfg = {}) {
  for (double x : w) Require(std::isfinite(x), "RenderFrame: non-finite weights");
  const auto y = Contour(w, cfg);
  const double inv = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  Matrix img(kFrameSize, kFrameSize);
  for (std::size_t r = 0; r < kFrameSize; ++r)
    for (std::size_t c = 0; c < kFrameSize; ++c) {
      const double d = static_cast<double>(r) - y[c];
      double v = std::exp(-d * d * inv);
      if (cfg.speckle > 0) v += cfg.speckle * rng.Gaussian();
      img(r, c) = std::clamp(v, 0.0, 1.0);
    }
  return img;
}

inline ArtVec ArtRow(const Matrix &art, std::size_t t) {
  ArtVec w;
  for (std::size_t i = 0; i < kArtDim; ++i) w[i] = art(t, i);
  return w;
}

}  // namespace a2a::synth
