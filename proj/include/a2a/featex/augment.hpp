// a2a/featex/augment.hpp

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
#include <string>
#include <vector>

#include "a2a/numcore/common.hpp"
#include "a2a/numcore/config.hpp"
#include "a2a/numcore/matrix.hpp"
#include "a2a/numcore/rng.hpp"

namespace a2a::featex {

/// Concatenates frames t - context/2 .. t + context/2, replicating edges.
inline Matrix Splice(const Matrix &seq, std::size_t context = 3) {
  Require(seq.rows() > 0, "Splice: empty sequence");
  Require(context % 2 == 1, "Splice: context must be odd");
  const auto T = static_cast<std::ptrdiff_t>(seq.rows());
  const auto half = static_cast<std::ptrdiff_t>(context / 2);
  const std::size_t d = seq.cols();
  Matrix out(seq.rows(), d * context);
  for (std::ptrdiff_t t = 0; t < T; ++t)
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      const auto src = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(t + k, 0, T - 1));
      const auto row = seq.Row(src);
      std::copy(row.begin(), row.end(), out.Row(static_cast<std::size_t>(t)).begin() + (k + half) * static_cast<std::ptrdiff_t>(d));
    }
  return out;
}

struct Perturbed {
  Matrix feats;
  std::vector<int> labels;
};

/// Feature-domain speed change: output frame j samples time j * factor by
/// linear interpolation; labels take the nearest source frame.
inline Perturbed SpeedPerturb(const Matrix &seq, const std::vector<int> &labels, double factor) {
  Require(factor >= 0.5 && factor <= 2.0, StrCat("SpeedPerturb: factor ", factor, " outside [0.5, 2]"));
  Require(seq.rows() > 0, "SpeedPerturb: empty sequence");
  RequireShape(labels.empty() || labels.size() == seq.rows(), "SpeedPerturb: labels/features length mismatch");
  const std::size_t T = seq.rows();
  const auto out_len = static_cast<std::size_t>(std::max(1.0, std::round(static_cast<double>(T) / factor)));
  Perturbed p{Matrix(out_len, seq.cols()), {}};
  for (std::size_t j = 0; j < out_len; ++j) {
    const double s = std::min(static_cast<double>(j) * factor, static_cast<double>(T - 1));
    const auto i0 = static_cast<std::size_t>(s);
    const std::size_t i1 = std::min(i0 + 1, T - 1);
    const double f = s - static_cast<double>(i0);
    for (std::size_t c = 0; c < seq.cols(); ++c)
      p.feats(j, c) = f == 0.0 ? seq(i0, c) : (1.0 - f) * seq(i0, c) + f * seq(i1, c);
    if (!labels.empty()) p.labels.push_back(labels[std::min(static_cast<std::size_t>(std::lround(s)), T - 1)]);
  }
  return p;
}

struct Mask {
  enum Axis { kTime, kFreq } axis = kTime;
  std::size_t start = 0;
  std::size_t width = 0;
};

struct AugmentPolicy {
  std::vector<double> speed_factors{0.9, 1.0, 1.1};
  bool per_speaker_speed = false;  // one factor per speaker instead of per copy
  std::size_t time_masks = 2;
  std::size_t freq_masks = 2;
  std::size_t max_freq_width = 8;
  double max_time_frac = 0.1;  // width <= ceil(T * frac)

  Json ToJson() const {
    return {{"speed_factors", speed_factors}, {"per_speaker_speed", per_speaker_speed}, {"time_masks", time_masks},
            {"freq_masks", freq_masks}, {"max_freq_width", max_freq_width}, {"max_time_frac", max_time_frac}};
  }
  static AugmentPolicy FromJson(const Json &j, const std::string &where = "augment") {
    AugmentPolicy p;
    ConfigReader r(j, where);
    r.Get("speed_factors", p.speed_factors).Get("per_speaker_speed", p.per_speaker_speed);
    r.Get("time_masks", p.time_masks).Get("freq_masks", p.freq_masks).Get("max_freq_width", p.max_freq_width);
    r.Get("max_time_frac", p.max_time_frac);
    r.Finish();
    for (double f : p.speed_factors)
      if (f < 0.5 || f > 2.0) throw ConfigError(where + ".speed_factors must lie in [0.5, 2]");
    if (p.max_time_frac < 0.0 || p.max_time_frac > 1.0) throw ConfigError(where + ".max_time_frac must lie in [0, 1]");
    return p;
  }

  std::size_t MaxTimeWidth(std::size_t T) const {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(T) * max_time_frac));
  }

  /// Factor for a speaker in per-speaker mode, stable across runs.
  double SpeakerFactor(const std::string &speaker, std::uint64_t seed) const {
    Require(!speed_factors.empty(), "AugmentPolicy: no speed factors");
    const std::uint64_t h = DeriveSeed(seed, "speed/" + speaker);
    return speed_factors[h % speed_factors.size()];
  }
};

/// Fills the masked cells with the per-channel utterance mean of the
/// unmasked input.
inline Matrix ApplyMasks(const Matrix &seq, const std::vector<Mask> &masks) {
  Matrix out = seq;
  if (seq.rows() == 0) return out;
  Matrix mean = ColSums(seq);
  mean *= 1.0 / static_cast<double>(seq.rows());
  for (const Mask &m : masks) {
    if (m.axis == Mask::kTime) {
      RequireShape(m.start + m.width <= seq.rows(), "ApplyMasks: time mask out of range");
      for (std::size_t t = m.start; t < m.start + m.width; ++t)
        for (std::size_t c = 0; c < seq.cols(); ++c) out(t, c) = mean(0, c);
    } else {
      RequireShape(m.start + m.width <= seq.cols(), "ApplyMasks: frequency mask out of range");
      for (std::size_t t = 0; t < seq.rows(); ++t)
        for (std::size_t c = m.start; c < m.start + m.width; ++c) out(t, c) = mean(0, c);
    }
  }
  return out;
}

/// Draws widths uniformly in [0, max] and starts uniformly in range.
inline std::vector<Mask> DrawMasks(std::size_t T, std::size_t dim, const AugmentPolicy &p, Rng &rng) {
  std::vector<Mask> masks;
  const std::size_t tw = std::min(p.MaxTimeWidth(T), T);
  for (std::size_t i = 0; i < p.time_masks; ++i) {
    Mask m{Mask::kTime, 0, static_cast<std::size_t>(rng.UniformInt(0, static_cast<std::int64_t>(tw)))};
    m.start = static_cast<std::size_t>(rng.UniformInt(0, static_cast<std::int64_t>(T - m.width)));
    masks.push_back(m);
  }
  const std::size_t fw = std::min(p.max_freq_width, dim);
  for (std::size_t i = 0; i < p.freq_masks; ++i) {
    Mask m{Mask::kFreq, 0, static_cast<std::size_t>(rng.UniformInt(0, static_cast<std::int64_t>(fw)))};
    m.start = static_cast<std::size_t>(rng.UniformInt(0, static_cast<std::int64_t>(dim - m.width)));
    masks.push_back(m);
  }
  return masks;
}

inline Matrix SpecAugment(const Matrix &seq, const AugmentPolicy &p, Rng &rng) {
  return ApplyMasks(seq, DrawMasks(seq.rows(), seq.cols(), p, rng));
}

}  // namespace a2a::featex
