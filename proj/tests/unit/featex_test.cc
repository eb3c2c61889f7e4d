// a2a/tests/unit/featex_test.cc

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

#include <cmath>
#include <filesystem>

#include "a2a/featex.hpp"

namespace a2a::featex {
namespace {

Matrix RandomMatrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  return Matrix::Gaussian(r, c, rng, 1.0);
}

// Direct double-sum DCT-II, written from the definition.
double BruteDct2(const Matrix &f, std::size_t k, std::size_t l) {
  const double N = static_cast<double>(f.rows());
  const double pi = std::acos(-1.0);
  auto a = [&](std::size_t u) { return u == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N); };
  double s = 0.0;
  for (std::size_t n = 0; n < f.rows(); ++n)
    for (std::size_t m = 0; m < f.cols(); ++m)
      s += f(n, m) * std::cos(pi * (2.0 * n + 1.0) * k / (2.0 * N)) * std::cos(pi * (2.0 * m + 1.0) * l / (2.0 * N));
  return a(k) * a(l) * s;
}

TEST(Dct, ConstantFrameIsDcOnly) {
  DctCodec codec;
  Matrix c = codec.Encode(Matrix(64, 64, 0.25));
  ASSERT_EQ(c.size(), 144u);
  EXPECT_NEAR(c(0, 0), 64 * 0.25, 1e-12);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], 0.0, 1e-12);
}

TEST(Dct, TwoByTwoMatchesDefinition) {
  DctCodec codec(2, 2);
  Matrix f{{0.3, -1.2}, {2.5, 0.7}};
  Matrix c = codec.Encode(f);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) EXPECT_NEAR(c(0, k * 2 + l), BruteDct2(f, k, l), 1e-12);
}

TEST(Dct, EightByEightTruncatedMatchesDefinition) {
  DctCodec codec(8, 3);
  Matrix f = RandomMatrix(8, 8, 4);
  Matrix c = codec.Encode(f);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = 0; l < 3; ++l) EXPECT_NEAR(c(0, k * 3 + l), BruteDct2(f, k, l), 1e-12);
}

TEST(Dct, EncodeDecodeIsIdentityOnCoefficients) {
  DctCodec codec;
  Matrix c = RandomMatrix(1, 144, 5);
  Matrix back = codec.Encode(codec.Decode(c));
  back.AddScaled(c, -1.0);
  EXPECT_LT(back.FrobeniusNorm(), 1e-9);
  EXPECT_EQ(codec.Decode(Matrix(1, 144)).MaxAbs(), 0.0);
}

TEST(Dct, FullTransformRoundTrips) {
  DctCodec codec(64, 64);
  Matrix f = RandomMatrix(64, 64, 6);
  Matrix back = codec.Decode(codec.Encode(f));
  back.AddScaled(f, -1.0);
  EXPECT_LT(back.FrobeniusNorm(), 1e-9);
}

TEST(Dct, TruncationIsLossyProjection) {
  DctCodec codec;
  Matrix f = RandomMatrix(64, 64, 7);
  Matrix once = codec.Decode(codec.Encode(f));
  Matrix err = once;
  err.AddScaled(f, -1.0);
  EXPECT_LT(err.FrobeniusNorm(), f.FrobeniusNorm());
  Matrix twice = codec.Decode(codec.Encode(once));
  twice.AddScaled(once, -1.0);
  EXPECT_LT(twice.FrobeniusNorm(), 1e-9);
}

TEST(Dct, WrongSizesThrow) {
  DctCodec codec;
  EXPECT_THROW(codec.Encode(Matrix(32, 64)), ShapeError);
  EXPECT_THROW(codec.Decode(Matrix(1, 143)), ShapeError);
}

TEST(Dct, BilinearResizeKeepsCornersAndConstants) {
  Matrix img{{0.0, 1.0}, {2.0, 3.0}};
  Matrix big = ResizeBilinear(img, 3, 3);
  EXPECT_DOUBLE_EQ(big(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(big(2, 2), 3.0);
  EXPECT_DOUBLE_EQ(big(1, 1), 1.5);
  Matrix flat = ResizeBilinear(Matrix(100, 80, 0.4), 64, 64);
  for (double v : flat.data()) EXPECT_NEAR(v, 0.4, 1e-15);
}

TEST(Norm, SourceSplitIsStandardized) {
  std::vector<Matrix> seqs;
  for (int i = 0; i < 5; ++i) {
    Matrix m = RandomMatrix(30 + i, 6, 10 + i);
    for (std::size_t t = 0; t < m.rows(); ++t) m(t, 2) = 3.0 * m(t, 2) + 7.0;
    seqs.push_back(m);
  }
  NormStats s = NormStats::Compute(seqs, "SRC/train");
  std::vector<Matrix> z;
  for (const auto &m : seqs) z.push_back(s.Apply(m));
  NormStats again = NormStats::Compute(z, "z");
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_NEAR(again.means[j], 0.0, 1e-6);
    EXPECT_NEAR(again.sds[j], 1.0, 1e-6);
  }
  Matrix back = s.Invert(z[0]);
  back.AddScaled(seqs[0], -1.0);
  EXPECT_LT(back.MaxAbs(), 1e-12);
}

TEST(Norm, ConstantDimensionUsesFloor) {
  NormStats s = NormStats::Compute(std::vector<Matrix>{Matrix(4, 2, 1.0)}, "c");
  EXPECT_EQ(s.sds[0], kSdFloor);
}

TEST(Norm, JsonRoundTrip) {
  namespace fs = std::filesystem;
  NormStats s = NormStats::Compute(std::vector<Matrix>{RandomMatrix(10, 3, 2)}, "SRC/train");
  const fs::path p = fs::temp_directory_path() / "a2a_norm_test.json";
  s.Save(p);
  NormStats l = NormStats::Load(p);
  EXPECT_EQ(l.means, s.means);
  EXPECT_EQ(l.sds, s.sds);
  EXPECT_EQ(l.source, "SRC/train");
  fs::remove(p);
  EXPECT_THROW(s.Apply(Matrix(2, 4)), ShapeError);
}

TEST(Splice, ContextOneIsIdentity) {
  Matrix m = RandomMatrix(5, 4, 3);
  EXPECT_EQ(Splice(m, 1), m);
}

TEST(Splice, ContextThreeReplicatesEdges) {
  Matrix m = RandomMatrix(6, 40, 3);
  Matrix s = Splice(m, 3);
  ASSERT_EQ(s.cols(), 120u);
  for (std::size_t c = 0; c < 40; ++c) {
    EXPECT_EQ(s(0, c), m(0, c));
    EXPECT_EQ(s(0, 40 + c), m(0, c));
    EXPECT_EQ(s(0, 80 + c), m(1, c));
    EXPECT_EQ(s(5, 80 + c), m(5, c));
    EXPECT_EQ(s(3, c), m(2, c));
  }
  EXPECT_THROW(Splice(Matrix(0, 3), 3), Error);
}

TEST(Speed, IdentityAndLength) {
  Matrix m = RandomMatrix(90, 3, 8);
  std::vector<int> lab(90);
  for (int i = 0; i < 90; ++i) lab[i] = i / 10;
  Perturbed same = SpeedPerturb(m, lab, 1.0);
  EXPECT_EQ(same.feats, m);
  EXPECT_EQ(same.labels, lab);
  Perturbed slow = SpeedPerturb(m, lab, 0.9);
  EXPECT_EQ(slow.feats.rows(), 100u);
  EXPECT_EQ(slow.labels.size(), 100u);
  EXPECT_EQ(SpeedPerturb(m, lab, 1.1).feats.rows(), 82u);
  EXPECT_THROW(SpeedPerturb(m, lab, 2.5), Error);
}

TEST(Speed, ConstantInputStaysConstant) {
  for (double f : {0.5, 0.77, 1.3, 2.0}) {
    Perturbed p = SpeedPerturb(Matrix(37, 2, -1.25), {}, f);
    for (double v : p.feats.data()) EXPECT_EQ(v, -1.25);
  }
}

TEST(SpecAug, ZeroMasksIsIdentity) {
  Matrix m = RandomMatrix(20, 40, 9);
  AugmentPolicy p;
  p.time_masks = p.freq_masks = 0;
  Rng rng(1);
  EXPECT_EQ(SpecAugment(m, p, rng), m);
}

TEST(SpecAug, FrequencyMaskFillsChannelMean) {
  Matrix m = RandomMatrix(20, 40, 9);
  Matrix out = ApplyMasks(m, {{Mask::kFreq, 5, 8}});
  Matrix mean = ColSums(m);
  std::size_t changed_cols = 0;
  for (std::size_t c = 0; c < 40; ++c) {
    bool all_mean = true;
    for (std::size_t t = 0; t < 20; ++t) all_mean &= std::abs(out(t, c) - mean(0, c) / 20.0) < 1e-12;
    changed_cols += all_mean;
  }
  EXPECT_EQ(changed_cols, 8u);
}

TEST(SpecAug, MaskedCellsRespectPolicyBound) {
  AugmentPolicy p;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t T = 20 + seed;
    Matrix m = RandomMatrix(T, 40, seed + 100);
    const Matrix orig = m;
    Matrix out = SpecAugment(m, p, rng);
    EXPECT_EQ(m, orig);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < m.size(); ++i) changed += out.data()[i] != m.data()[i];
    EXPECT_LE(changed, 2 * p.MaxTimeWidth(T) * 40 + 2 * 8 * T);
  }
}

TEST(SpecAug, SpeakerFactorIsStable) {
  AugmentPolicy p;
  EXPECT_EQ(p.SpeakerFactor("TGT_A_s01", 3), p.SpeakerFactor("TGT_A_s01", 3));
  const double f = p.SpeakerFactor("x", 1);
  EXPECT_TRUE(f == 0.9 || f == 1.0 || f == 1.1);
}

}  // namespace
}  // namespace a2a::featex
