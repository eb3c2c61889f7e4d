// a2a/tests/unit/synth_test.cc

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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "a2a/synth.hpp"

namespace a2a::synth {
namespace {

CorpusConfig SmallConfig() {
  CorpusConfig c;
  c.speakers_per_domain = 4;
  c.utts_per_speaker = 3;
  return c;
}

std::string Slurp(const std::filesystem::path &p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

TEST(Inventory, TargetsRespectBoxAndSpacing) {
  for (auto lang : {Language::kL1, Language::kL2}) {
    Rng rng(11);
    PhoneInventory inv = BuildPhoneInventory(lang, rng);
    ASSERT_EQ(inv.size(), NumPhones(lang));
    for (std::size_t i = 0; i < inv.size(); ++i) {
      for (double x : inv.targets[i]) {
        EXPECT_GE(x, -1.0);
        EXPECT_LE(x, 1.0);
      }
      for (std::size_t j = i + 1; j < inv.size(); ++j) EXPECT_GE(ArtDistance(inv.targets[i], inv.targets[j]), 0.3);
      double s = 0.0;
      for (std::size_t j = 0; j < inv.size(); ++j) s += inv.transitions(i, j);
      EXPECT_NEAR(s, 1.0, 1e-12);
      EXPECT_EQ(inv.transitions(i, i), 0.0);
    }
  }
}

TEST(Inventory, ImpossibleSpacingFails) {
  Rng rng(3);
  EXPECT_THROW(BuildPhoneInventory(Language::kL1, rng, 5.0, 10000), Error);
}

TEST(World, DeterministicAndLanguagesDiffer) {
  SynthWorld a = SynthWorld::Build(5, SmallConfig());
  SynthWorld b = SynthWorld::Build(5, SmallConfig());
  EXPECT_EQ(a.mixing.mix, b.mixing.mix);
  EXPECT_EQ(a.Domain(DomainId::kTgtA).channel, b.Domain(DomainId::kTgtA).channel);
  EXPECT_EQ(a.l1.size(), 20u);
  EXPECT_EQ(a.l2.size(), 16u);
  EXPECT_NE(a.l1.targets[0], a.l2.targets[0]);
  EXPECT_EQ(a.speakers.size(), 12u);
}

TEST(World, TargetChannelPerturbationHasRequestedNorm) {
  SynthWorld w = SynthWorld::Build(9, SmallConfig());
  for (auto d : {DomainId::kTgtA, DomainId::kTgtB}) {
    Matrix p = w.Domain(d).channel;
    p.AddScaled(Matrix::Identity(kFbkDim), -1.0);
    EXPECT_NEAR(SpectralNorm(p), 0.5, 1e-6);
  }
  EXPECT_EQ(w.Domain(DomainId::kSrc).channel, Matrix::Identity(kFbkDim));
}

TEST(Utterance, SourceFieldsAreLengthMatched) {
  SynthWorld w = SynthWorld::Build(1, SmallConfig());
  Rng rng(42);
  UtteranceRecord u = SynthUtterance(w, w.Domain(DomainId::kSrc), w.speakers[0], rng);
  const std::size_t T = u.num_frames();
  EXPECT_GE(u.phones.size(), 5u);
  EXPECT_LE(u.phones.size(), 15u);
  EXPECT_EQ(u.fbk.rows(), T);
  EXPECT_EQ(u.fbk.cols(), kFbkDim);
  EXPECT_EQ(u.truth_art.rows(), T);
  ASSERT_EQ(u.uti.size(), T);
  EXPECT_EQ(u.uti[0].rows(), 64u);
  EXPECT_EQ(u.uti[0].cols(), 64u);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t i = 0; i < kArtDim; ++i) EXPECT_LT(std::abs(u.truth_art(t, i) - u.truth_art(t - 1, i)), 0.2);
  for (std::size_t i = 1; i < u.phones.size(); ++i) EXPECT_NE(u.phones[i], u.phones[i - 1]);
}

TEST(Utterance, TargetsHaveNoUltrasound) {
  SynthWorld w = SynthWorld::Build(1, SmallConfig());
  Rng rng(42);
  UtteranceRecord u = SynthUtterance(w, w.Domain(DomainId::kTgtB), w.speakers[8], rng);
  EXPECT_TRUE(u.uti.empty());
  for (int l : u.labels) EXPECT_LT(l, 16);
}

TEST(Utterance, SpeakingRateStretchesPhones) {
  SynthWorld w = SynthWorld::Build(2, SmallConfig());
  auto frames_per_phone = [&](DomainId d) {
    double frames = 0, phones = 0;
    for (int i = 0; i < 200; ++i) {
      Rng rng(DeriveSeed(77, StrCat("rate/", i)));
      UtteranceRecord u = SynthUtterance(w, w.Domain(d), w.speakers[0], rng, {false});
      frames += static_cast<double>(u.num_frames());
      phones += static_cast<double>(u.phones.size());
    }
    return frames / phones;
  };
  const double src = frames_per_phone(DomainId::kSrc);
  const double tgt = frames_per_phone(DomainId::kTgtA);
  EXPECT_NEAR(tgt / src, 1.4, 0.14);
}

TEST(Utterance, NoiselessGenerationIsRepeatable) {
  CorpusConfig cfg = SmallConfig();
  cfg.src_noise = cfg.traj_noise = cfg.speckle = 0.0;
  SynthWorld w = SynthWorld::Build(4, cfg);
  Rng r1(8), r2(8);
  UtteranceRecord a = SynthUtterance(w, w.Domain(DomainId::kSrc), w.speakers[1], r1);
  UtteranceRecord b = SynthUtterance(w, w.Domain(DomainId::kSrc), w.speakers[1], r2);
  EXPECT_EQ(a.fbk, b.fbk);
  EXPECT_EQ(a.truth_art, b.truth_art);
  EXPECT_EQ(a.uti.back(), b.uti.back());
}

TEST(Render, RidgeFollowsContourWithoutSpeckle) {
  RenderConfig rc;
  rc.speckle = 0.0;
  Rng rng(1);
  Matrix img = RenderFrame({0.0, 0.0, 0.0, 0.0}, rng, rc);
  for (std::size_t c = 0; c < kFrameSize; ++c) {
    EXPECT_DOUBLE_EQ(img(32, c), 1.0);
    EXPECT_LT(img(16, c), 1e-6);
  }
  Matrix up = RenderFrame({1.0, 0.0, 0.0, 0.0}, rng, rc);
  EXPECT_DOUBLE_EQ(up(38, 10), 1.0);
}

TEST(Render, PixelsClippedToUnitRange) {
  RenderConfig rc;
  rc.speckle = 0.5;
  Rng rng(2);
  Matrix img = RenderFrame({0.3, -0.2, 0.1, 0.4}, rng, rc);
  for (double v : img.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Render, RejectsNonFiniteWeights) {
  Rng rng(2);
  EXPECT_THROW(RenderFrame({std::nan(""), 0.0, 0.0, 0.0}, rng), Error);
}

TEST(Corpus, SplitsAreSpeakerDisjoint) {
  Corpus c = GenerateCorpus(SmallConfig(), 3);
  EXPECT_EQ(c.utts.size(), 36u);
  std::map<std::string, std::set<Split>> seen;
  for (std::size_t i = 0; i < c.utts.size(); ++i) seen[c.utts[i].speaker].insert(c.splits[i]);
  for (const auto &[spk, splits] : seen) EXPECT_EQ(splits.size(), 1u) << spk;
  for (auto d : {DomainId::kSrc, DomainId::kTgtA, DomainId::kTgtB})
    for (auto s : {Split::kTrain, Split::kDev, Split::kEval}) EXPECT_FALSE(c.Select(d, s).empty());
}

TEST(Corpus, DefaultSizeIs960) {
  CorpusConfig cfg;
  EXPECT_EQ(3 * cfg.speakers_per_domain * cfg.utts_per_speaker, 960u);
  EXPECT_EQ(SpeakerSplit(cfg, 3), Split::kTrain);
  EXPECT_EQ(SpeakerSplit(cfg, 4), Split::kDev);
  EXPECT_EQ(SpeakerSplit(cfg, 6), Split::kEval);
}

TEST(Corpus, WorkerCountDoesNotChangeOutput) {
  Corpus a = GenerateCorpus(SmallConfig(), 21);
  MaxJobs() = 3;
  Corpus b = GenerateCorpus(SmallConfig(), 21);
  MaxJobs() = 1;
  ASSERT_EQ(a.utts.size(), b.utts.size());
  for (std::size_t i = 0; i < a.utts.size(); ++i) {
    EXPECT_EQ(a.utts[i].id, b.utts[i].id);
    EXPECT_EQ(a.utts[i].fbk, b.utts[i].fbk);
  }
}

TEST(Corpus, WriteLoadRoundTripAndByteIdenticalRegen) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "a2a_synth_test";
  fs::remove_all(base);
  Corpus c = GenerateCorpus(SmallConfig(), 17);
  WriteCorpus(c, base / "a");
  WriteCorpus(GenerateCorpus(SmallConfig(), 17), base / "b");
  EXPECT_EQ(Slurp(base / "a" / "manifest.json"), Slurp(base / "b" / "manifest.json"));
  for (const auto &u : c.utts)
    EXPECT_EQ(Slurp(base / "a" / "feats" / (u.id + ".fbk")), Slurp(base / "b" / "feats" / (u.id + ".fbk")));

  Corpus l = LoadCorpus(base / "a");
  ASSERT_EQ(l.utts.size(), c.utts.size());
  for (std::size_t i = 0; i < c.utts.size(); ++i) {
    EXPECT_EQ(l.utts[i].fbk, c.utts[i].fbk);
    EXPECT_EQ(l.utts[i].truth_art, c.utts[i].truth_art);
    EXPECT_EQ(l.utts[i].labels, c.utts[i].labels);
    EXPECT_EQ(l.utts[i].phones, c.utts[i].phones);
    EXPECT_EQ(l.utts[i].uti_seed, c.utts[i].uti_seed);
    EXPECT_EQ(l.splits[i], c.splits[i]);
  }
  fs::remove_all(base);
}

TEST(Corpus, UnknownConfigKeyRejected) {
  Json j = ToJson(SmallConfig());
  EXPECT_NO_THROW(CorpusConfigFromJson(j));
  j["speakers"] = 3;
  EXPECT_THROW(CorpusConfigFromJson(j), ConfigError);
}

TEST(Fseq, LabelsAndFeaturesRoundTrip) {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "a2a_fseq_test.bin";
  Matrix m{{1.5, -2.25}, {0.1, 3.0}};
  WriteFeatures(p, m);
  EXPECT_EQ(ReadFeatures(p), QuantizeF32(m));
  EXPECT_THROW(ReadLabels(p), Error);
  WriteLabels(p, {3, 1, 4});
  EXPECT_EQ(ReadLabels(p), (std::vector<int>{3, 1, 4}));
  fs::remove(p);
}

}  // namespace
}  // namespace a2a::synth
