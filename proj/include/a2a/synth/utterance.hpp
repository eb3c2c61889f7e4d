// a2a/synth/utterance.hpp

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
#include <optional>
#include <string>
#include <vector>

#include "a2a/synth/render.hpp"

namespace a2a::synth {

/// Knobs of the synthetic world. Defaults give 3 domains x 8 speakers x 40
/// utterances.
struct CorpusConfig {
  std::size_t speakers_per_domain = 8;
  std::size_t utts_per_speaker = 40;
  double train_frac = 0.5;
  double dev_frac = 0.25;

  double src_noise = 0.3;
  double tgt_a_noise = 0.3;
  double tgt_b_noise = 0.3;
  double tgt_a_rate = 1.4;
  double tgt_b_rate = 1.2;
  double channel_norm = 0.5;
  double offset_scale = 0.3;
  double speaker_gain_sd = 0.1;
  double traj_noise = 0.05;
  double speckle = 0.1;
  ArtVec mix_column_scale{1.0, 1.0, 1.0, 1.0};

  std::size_t min_phones = 5;
  std::size_t max_phones = 15;
  double min_dur = 8.0;
  double max_dur = 30.0;
};

inline constexpr double kMaxArtStep = 0.19;

/// One synthetic utterance with every time-indexed field length-matched.
struct UtteranceRecord {
  std::string id;
  std::string speaker;
  DomainId domain = DomainId::kSrc;
  Language language = Language::kL1;
  std::vector<int> phones;
  std::vector<int> labels;  // phone id per frame
  Matrix fbk;               // T x 40
  Matrix truth_art;         // T x 4, hidden for target domains
  std::vector<Matrix> uti;  // T frames of 64 x 64 when rendered
  std::uint64_t uti_seed = 0;

  std::size_t num_frames() const { return labels.size(); }
};

/// Everything shared across utterances: mixing, inventories, domains and
/// speakers, all drawn from child seeds of the corpus seed.
struct SynthWorld {
  std::uint64_t seed = 0;
  CorpusConfig config;
  AcousticMixing mixing;
  PhoneInventory l1, l2;
  std::vector<DomainSpec> domains;  // SRC, TGT_A, TGT_B
  std::vector<Speaker> speakers;    // grouped by domain, in id order

  const PhoneInventory &Inventory(Language l) const { return l == Language::kL1 ? l1 : l2; }
  const DomainSpec &Domain(DomainId id) const { return domains.at(static_cast<std::size_t>(id)); }

  static SynthWorld Build(std::uint64_t seed, const CorpusConfig &cfg) {
    SynthWorld w;
    w.seed = seed;
    w.config = cfg;
    Rng root(seed);
    Rng mix_rng = root.Child("mixing");
    w.mixing = AcousticMixing::Draw(mix_rng, cfg.mix_column_scale);
    Rng inv1 = root.Child("inventory/L1"), inv2 = root.Child("inventory/L2");
    w.l1 = BuildPhoneInventory(Language::kL1, inv1);
    w.l2 = BuildPhoneInventory(Language::kL2, inv2);

    DomainSpec src;
    src.id = DomainId::kSrc;
    src.language = Language::kL1;
    src.channel = Matrix::Identity(kFbkDim);
    src.offset = Matrix(1, kFbkDim);
    src.rate = 1.0;
    src.noise = cfg.src_noise;
    src.has_ultrasound = true;

    auto target = [&](DomainId id, Language lang, double rate, double noise) {
      Rng r = root.Child("domain/" + DomainName(id));
      DomainSpec d;
      d.id = id;
      d.language = lang;
      d.channel = BandEmphasisChannel(r, cfg.channel_norm);
      d.offset = SpectralTilt(r, cfg.offset_scale);
      d.rate = rate;
      d.noise = noise;
      d.has_ultrasound = false;
      return d;
    };
    w.domains = {src, target(DomainId::kTgtA, Language::kL1, cfg.tgt_a_rate, cfg.tgt_a_noise),
                 target(DomainId::kTgtB, Language::kL2, cfg.tgt_b_rate, cfg.tgt_b_noise)};

    for (const auto &d : w.domains)
      for (std::size_t s = 0; s < cfg.speakers_per_domain; ++s) {
        Speaker spk;
        spk.id = StrCat(DomainName(d.id), "_s", s < 10 ? "0" : "", s);
        spk.domain = d.id;
        Rng r = root.Child("speaker/" + spk.id);
        spk.gain = Matrix(1, kFbkDim);
        for (auto &g : spk.gain.data()) g = 1.0 + cfg.speaker_gain_sd * r.Gaussian();
        w.speakers.push_back(spk);
      }
    return w;
  }
};

/// Cosine interpolation between phone-centre knots, plus AR(1) smooth noise,
/// then a per-frame step limit so |w(t+1) - w(t)|_inf < 0.2 always holds.
inline Matrix ArticulatoryTrajectory(const PhoneInventory &inv, const std::vector<int> &phones,
                                     const std::vector<std::size_t> &durations, double traj_noise,
                                     Rng &rng) {
  std::size_t total = 0;
  std::vector<double> centers;
  for (auto d : durations) {
    centers.push_back(static_cast<double>(total) + 0.5 * static_cast<double>(d));
    total += d;
  }
  Matrix art(total, kArtDim);
  auto target = [&](std::size_t i) -> const ArtVec & {
    return inv.targets[static_cast<std::size_t>(phones[i])];
  };
  std::size_t k = 0;
  for (std::size_t t = 0; t < total; ++t) {
    const double tt = static_cast<double>(t) + 0.5;
    while (k + 1 < centers.size() && tt >= centers[k + 1]) ++k;
    if (tt <= centers[0] || k + 1 == centers.size()) {
      const ArtVec &hold = tt <= centers[0] ? target(0) : target(k);
      for (std::size_t i = 0; i < kArtDim; ++i) art(t, i) = hold[i];
      continue;
    }
    const ArtVec &a = target(k);
    const ArtVec &b = target(k + 1);
    const double s = (tt - centers[k]) / (centers[k + 1] - centers[k]);
    const double mix = 0.5 * (1.0 - std::cos(std::numbers::pi * s));
    for (std::size_t i = 0; i < kArtDim; ++i) art(t, i) = a[i] + (b[i] - a[i]) * mix;
  }
  const double rho = 0.9;
  const double innov = traj_noise * std::sqrt(1.0 - rho * rho);
  std::array<double, kArtDim> ar{};
  for (auto &x : ar) x = traj_noise * rng.Gaussian();
  for (std::size_t t = 0; t < total; ++t)
    for (std::size_t i = 0; i < kArtDim; ++i) {
      if (t > 0) ar[i] = rho * ar[i] + innov * rng.Gaussian();
      art(t, i) += ar[i];
    }
  for (std::size_t t = 1; t < total; ++t)
    for (std::size_t i = 0; i < kArtDim; ++i)
      art(t, i) = art(t - 1, i) + std::clamp(art(t, i) - art(t - 1, i), -kMaxArtStep, kMaxArtStep);
  return art;
}

/// Acoustic view of a trajectory for a given domain and speaker:
/// channel * (gain .* lift tanh(mix w + b)) + offset + noise.
inline Matrix AcousticFeatures(const SynthWorld &world, const DomainSpec &domain, const Speaker &spk,
                               const Matrix &art, Rng &rng) {
  Matrix clean = world.mixing.Apply(art);
  for (std::size_t t = 0; t < clean.rows(); ++t)
    for (std::size_t c = 0; c < kFbkDim; ++c) clean(t, c) *= spk.gain(0, c);
  Matrix fbk = MatMulBt(clean, domain.channel);
  AddRowVector(fbk, domain.offset);
  if (domain.noise > 0)
    for (auto &x : fbk.data()) x += domain.noise * rng.Gaussian();
  return fbk;
}

struct SynthOptions {
  bool render_uti = true;
};

/// Draw order from `rng`'s children: "phones", "durations", "trajectory",
/// "acoustic"; ultrasound speckle comes from the child seed "uti".
inline UtteranceRecord SynthUtterance(const SynthWorld &world, const DomainSpec &domain,
                                      const Speaker &spk, Rng &rng, const SynthOptions &opt = {}) {
  const auto &cfg = world.config;
  const PhoneInventory &inv = world.Inventory(domain.language);
  UtteranceRecord u;
  u.speaker = spk.id;
  u.domain = domain.id;
  u.language = domain.language;

  Rng prng = rng.Child("phones");
  const auto n = static_cast<std::size_t>(
      prng.UniformInt(static_cast<std::int64_t>(cfg.min_phones), static_cast<std::int64_t>(cfg.max_phones)));
  u.phones.push_back(static_cast<int>(prng.UniformInt(0, static_cast<std::int64_t>(inv.size()) - 1)));
  while (u.phones.size() < n) {
    const auto row = inv.transitions.Row(static_cast<std::size_t>(u.phones.back()));
    double r = prng.Uniform(), acc = 0.0;
    std::size_t next = inv.size() - 1;
    for (std::size_t j = 0; j < inv.size(); ++j) {
      acc += row[j];
      if (r < acc && row[j] > 0) {
        next = j;
        break;
      }
    }
    if (next == static_cast<std::size_t>(u.phones.back())) next = (next + 1) % inv.size();
    u.phones.push_back(static_cast<int>(next));
  }

  Rng drng = rng.Child("durations");
  std::vector<std::size_t> durs;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::ceil(domain.rate * drng.Uniform(cfg.min_dur, cfg.max_dur));
    durs.push_back(static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < durs.back(); ++k) u.labels.push_back(u.phones[i]);
  }

  Rng trng = rng.Child("trajectory");
  u.truth_art = ArticulatoryTrajectory(inv, u.phones, durs, cfg.traj_noise, trng);
  Rng arng = rng.Child("acoustic");
  u.fbk = AcousticFeatures(world, domain, spk, u.truth_art, arng);
  u.uti_seed = DeriveSeed(rng.seed(), "uti");
  if (domain.has_ultrasound && opt.render_uti) {
    Rng urng(u.uti_seed);
    RenderConfig rc;
    rc.speckle = cfg.speckle;
    for (std::size_t t = 0; t < u.num_frames(); ++t) u.uti.push_back(RenderFrame(ArtRow(u.truth_art, t), urng, rc));
  }
  return u;
}

}  // namespace a2a::synth
