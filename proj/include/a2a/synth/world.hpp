// a2a/synth/world.hpp

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

// The synthetic world: phone inventories, domains, and the fixed
// articulatory-to-acoustic mixing shared by all domains.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "a2a/numcore/layer.hpp"
#include "a2a/numcore/matrix.hpp"
#include "a2a/numcore/rng.hpp"

namespace a2a::synth {

inline constexpr std::size_t kArtDim = 4;
inline constexpr std::size_t kFbkDim = 40;
inline constexpr std::size_t kMixDim = 12;

using ArtVec = std::array<double, kArtDim>;

enum class Language { kL1, kL2 };
enum class DomainId { kSrc, kTgtA, kTgtB };

inline std::string LanguageName(Language l) { return l == Language::kL1 ? "L1" : "L2"; }
inline std::size_t NumPhones(Language l) { return l == Language::kL1 ? 20 : 16; }

inline std::string DomainName(DomainId d) {
  switch (d) {
    case DomainId::kSrc: return "SRC";
    case DomainId::kTgtA: return "TGT_A";
    case DomainId::kTgtB: return "TGT_B";
  }
  return "?";
}

inline DomainId ParseDomain(const std::string &s) {
  if (s == "SRC") return DomainId::kSrc;
  if (s == "TGT_A") return DomainId::kTgtA;
  if (s == "TGT_B") return DomainId::kTgtB;
  throw Error("unknown domain " + s);
}

struct PhoneInventory {
  Language language = Language::kL1;
  std::vector<ArtVec> targets;
  /// Row-stochastic phone transition matrix with a zero diagonal.
  Matrix transitions;

  std::size_t size() const { return targets.size(); }
};

inline double ArtDistance(const ArtVec &a, const ArtVec &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kArtDim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Rejection-samples per-phone targets in [-1, 1]^4 with pairwise distance
/// at least `min_dist`, then draws a sparse-ish transition matrix.
inline PhoneInventory BuildPhoneInventory(Language lang, Rng &rng, double min_dist = 0.3,
                                          int max_attempts = 10000) {
  PhoneInventory inv;
  inv.language = lang;
  const std::size_t n = NumPhones(lang);
  int attempts = 0;
  while (inv.targets.size() < n) {
    if (++attempts > max_attempts)
      throw Error(StrCat("BuildPhoneInventory: gave up after ", max_attempts, " attempts"));
    ArtVec cand;
    for (auto &x : cand) x = rng.Uniform(-1.0, 1.0);
    bool ok = true;
    for (const auto &t : inv.targets)
      if (ArtDistance(t, cand) < min_dist) {
        ok = false;
        break;
      }
    if (ok) inv.targets.push_back(cand);
  }
  inv.transitions = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = std::exp(1.5 * rng.Gaussian());
      if (j != i) {
        inv.transitions(i, j) = w;
        s += w;
      }
    }
    for (std::size_t j = 0; j < n; ++j) inv.transitions(i, j) /= s;
  }
  return inv;
}

struct DomainSpec {
  DomainId id = DomainId::kSrc;
  Language language = Language::kL1;
  Matrix channel;  // 40 x 40
  Matrix offset;   // 1 x 40, additive log-spectral channel term
  double rate = 1.0;
  double noise = 0.0;
  bool has_ultrasound = false;
};

/// Largest singular value by power iteration on M^T M.
inline double SpectralNorm(const Matrix &m, int iters = 200) {
  Matrix v(m.cols(), 1, 1.0);
  double sigma = 0.0;
  for (int i = 0; i < iters; ++i) {
    Matrix w = MatMulAt(m, MatMul(m, v));
    const double n = w.FrobeniusNorm();
    if (n == 0.0) return 0.0;
    v = w * (1.0 / n);
    sigma = std::sqrt(n);
  }
  return sigma;
}

/// Identity plus a rank-`rank` band-emphasis perturbation with spectral
/// norm exactly `norm`. Left factors are smooth bumps over the channel axis.
inline Matrix BandEmphasisChannel(Rng &rng, double norm, std::size_t rank = 3) {
  Matrix p(kFbkDim, kFbkDim);
  for (std::size_t k = 0; k < rank; ++k) {
    const double center = rng.Uniform(0.0, static_cast<double>(kFbkDim - 1));
    const double width = rng.Uniform(3.0, 8.0);
    const double sign = rng.Uniform() < 0.5 ? -1.0 : 1.0;
    std::vector<double> v(kFbkDim);
    for (auto &x : v) x = rng.Gaussian();
    for (std::size_t i = 0; i < kFbkDim; ++i) {
      const double z = (static_cast<double>(i) - center) / width;
      const double u = sign * std::exp(-0.5 * z * z);
      for (std::size_t j = 0; j < kFbkDim; ++j) p(i, j) += u * v[j];
    }
  }
  p *= norm / SpectralNorm(p);
  return Matrix::Identity(kFbkDim) + p;
}

/// Smooth additive offset across channels with peak magnitude `scale`.
inline Matrix SpectralTilt(Rng &rng, double scale) {
  Matrix off(1, kFbkDim);
  const double a = rng.Gaussian(), b = rng.Gaussian(), c = rng.Gaussian();
  double mx = 0.0;
  for (std::size_t i = 0; i < kFbkDim; ++i) {
    const double x = static_cast<double>(i) / (kFbkDim - 1);
    off(0, i) = a * (x - 0.5) + b * std::cos(2.0 * std::numbers::pi * x) + c * std::sin(3.0 * std::numbers::pi * x);
    mx = std::max(mx, std::abs(off(0, i)));
  }
  if (mx > 0) off *= scale / mx;
  return off;
}

/// Global articulatory-to-acoustic mixing: fbk = lift * tanh(mix w + bias).
struct AcousticMixing {
  Matrix mix;       // kMixDim x 4
  Matrix mix_bias;  // 1 x kMixDim
  Matrix lift;      // 40 x kMixDim

  static AcousticMixing Draw(Rng &rng, const ArtVec &column_scale) {
    AcousticMixing m;
    m.mix = Matrix(kMixDim, kArtDim);
    for (std::size_t r = 0; r < kMixDim; ++r)
      for (std::size_t c = 0; c < kArtDim; ++c) m.mix(r, c) = column_scale[c] * rng.Gaussian();
    m.mix_bias = Matrix::Gaussian(1, kMixDim, rng, 0.5);
    m.lift = Matrix::Gaussian(kFbkDim, kMixDim, rng, 1.0 / std::sqrt(static_cast<double>(kMixDim)));
    return m;
  }

  /// Clean 40-dim spectrum for each row of a T x 4 trajectory.
  Matrix Apply(const Matrix &art) const {
    Matrix h = MatMulBt(art, mix);
    AddRowVector(h, mix_bias);
    for (auto &x : h.data()) x = std::tanh(x);
    return MatMulBt(h, lift);
  }
};

struct Speaker {
  std::string id;
  DomainId domain = DomainId::kSrc;
  Matrix gain;  // 1 x 40 multiplicative spectral gain
};

}  // namespace a2a::synth
