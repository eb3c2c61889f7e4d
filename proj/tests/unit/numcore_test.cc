// tests/unit/numcore_test.cc

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
#include <fstream>

#include "a2a/numcore.hpp"
#include "support/layer_cases.hpp"

namespace a2a {
namespace {

TEST(Rng, MatchesGoldenFile) {
  std::ifstream is(std::filesystem::path(A2A_TEST_DATA_DIR) / "golden" / "rng_seed1.json");
  ASSERT_TRUE(is.good());
  Json golden = Json::parse(is);
  Rng rng(golden.at("seed").get<std::uint64_t>());
  Rng rng2(golden.at("seed").get<std::uint64_t>());
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(std::to_string(rng.NextU64()), golden["u64"][i].get<std::string>());
    EXPECT_EQ(rng2.Uniform(), golden["uniform"][i].get<double>());
  }
}

TEST(Rng, SameSeedSameSequence) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.Gaussian(), b.Gaussian());
}

TEST(Rng, GaussianMeanNearZero) {
  Rng rng(1);
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.Gaussian();
    s += g;
    s2 += g * g;
  }
  EXPECT_GT(s / n, -0.02);
  EXPECT_LT(s / n, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, DerivedSeedsDependOnPurpose) {
  EXPECT_NE(DeriveSeed(5, "corpus"), DeriveSeed(5, "model"));
  EXPECT_EQ(DeriveSeed(5, "corpus"), DeriveSeed(5, "corpus"));
  EXPECT_NE(DeriveSeed(5, "corpus"), DeriveSeed(6, "corpus"));
}

TEST(LayerForward, ZeroAffineGivesZero) {
  Affine a(3, 4);
  Rng rng(3);
  Matrix out = a.Forward(Matrix::Gaussian(5, 3, rng));
  EXPECT_EQ(out.MaxAbs(), 0.0);
  EXPECT_EQ(out.rows(), 5u);
  EXPECT_EQ(out.cols(), 4u);
}

TEST(LayerForward, ReluDefinition) {
  Relu r(3);
  Matrix out = r.Forward(Matrix{{-1.0, 0.0, 2.0}});
  EXPECT_EQ(out, (Matrix{{0.0, 0.0, 2.0}}));
}

TEST(LayerForward, ZeroLstmHasZeroHidden) {
  LstmCell cell(3, 4);
  Rng rng(1);
  Matrix out = cell.Forward(Matrix::Gaussian(6, 3, rng));
  EXPECT_EQ(out.MaxAbs(), 0.0);
}

TEST(LayerForward, ShapeMismatchThrows) {
  Affine a(3, 4);
  EXPECT_THROW(a.Forward(Matrix(2, 5)), ShapeError);
}

TEST(LayerForward, NonFiniteOutputThrows) {
  TanhLayer t(1);
  EXPECT_THROW(t.Forward(Matrix{{std::nan("")}}), NumericError);
}

TEST(LayerForward, SoftmaxRowsSumToOne) {
  Rng rng(9);
  SoftmaxCe sm(7);
  Matrix p = sm.Forward(Matrix::Gaussian(20, 7, rng, 5.0));
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double s = 0.0;
    for (double x : p.Row(r)) s += x;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(LayerForward, TimeSpliceReplicatesEdges) {
  TimeSplice sp(1, {-1, 0, 1});
  Matrix out = sp.Forward(Matrix{{1.0}, {2.0}, {3.0}});
  EXPECT_EQ(out, (Matrix{{1.0, 1.0, 2.0}, {1.0, 2.0, 3.0}, {2.0, 3.0, 3.0}}));
}

TEST(LayerForward, LstmDoesNotCrossSegments) {
  Rng rng(4);
  LstmCell cell(2, 3);
  cell.Init(rng);
  Matrix x = Matrix::Gaussian(7, 2, rng);
  Matrix joint = cell.Forward(x, SeqLayout({3, 4}));
  Matrix second = cell.Forward(x.RowRange(3, 4));
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(joint(3 + r, c), second(r, c));
}

TEST(LayerBackward, AffineBiasGradCountsRows) {
  Affine a(2, 3);
  Rng rng(2);
  a.Forward(Matrix::Gaussian(4, 2, rng));
  a.Backward(Matrix(4, 3, 1.0));
  for (double g : a.bias().grad.data()) EXPECT_EQ(g, 4.0);
}

TEST(LayerBackward, WithoutForwardThrows) {
  Affine a(2, 3);
  EXPECT_THROW(a.Backward(Matrix(1, 3)), Error);
}

TEST(LayerBackward, RandomAffineMatchesFiniteDifferences) {
  Rng rng(11);
  LayerStack s;
  s.Emplace<Affine>(4, 5);
  s.Emplace<SoftmaxCe>(5);
  testing::RandomizeParams(s, rng);
  dynamic_cast<SoftmaxCe &>(s.back()).SetTargets({0, 4, 2});
  auto rep = GradCheck(s, Matrix::Gaussian(3, 4, rng), 1e-5);
  EXPECT_LT(rep.MaxError(), 1e-5);
}

TEST(LayerBackward, RandomLstmMatchesFiniteDifferences) {
  Rng rng(12);
  LayerStack s;
  s.Emplace<LstmCell>(6, 6);
  s.Emplace<Affine>(6, 3);
  s.Emplace<SoftmaxCe>(3);
  testing::RandomizeParams(s, rng);
  dynamic_cast<SoftmaxCe &>(s.back()).SetTargets({0, 1, 2, 1});
  auto rep = GradCheck(s, Matrix::Gaussian(4, 6, rng), 1e-5);
  for (const auto &e : rep.entries) EXPECT_LT(e.max_rel_error, 1e-5) << e.name;
}

TEST(SemiOrthogonal, OrthonormalRowsAreFixedPoint) {
  Matrix b{{1, 0, 0, 0}, {0, 0, 1, 0}};
  EXPECT_EQ(SemiOrthogonalStep(b), b);
}

TEST(SemiOrthogonal, ScaledOrthonormalDefectShrinks) {
  Matrix b{{2, 0, 0, 0}, {0, 0, 2, 0}};
  const double before = SemiOrthogonalDefect(b);
  const double after = SemiOrthogonalDefect(SemiOrthogonalStep(b));
  EXPECT_LT(after, before);
}

TEST(SemiOrthogonal, RandomFourByEightConvergesIn20Steps) {
  Rng rng(5);
  // entries N(0, 1/cols) keep singular values inside the basin (0, sqrt 3)
  Matrix b = Matrix::Gaussian(4, 8, rng, 1.0 / std::sqrt(8.0));
  for (int i = 0; i < 20; ++i) b = SemiOrthogonalStep(b);
  EXPECT_LT(SemiOrthogonalDefect(b), 1e-3);
}

TEST(SemiOrthogonal, TallMatrixRejected) {
  EXPECT_THROW(SemiOrthogonalStep(Matrix(5, 3)), ShapeError);
}

TEST(SemiOrthogonal, DefectNonIncreasingNearTheSet) {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rows = static_cast<std::size_t>(rng.UniformInt(2, 6));
    const auto cols = rows + static_cast<std::size_t>(rng.UniformInt(0, 6));
    Matrix b = Matrix::Gaussian(rows, cols, rng, 1.0 / std::sqrt(static_cast<double>(cols)));
    ConstrainSemiOrthogonal(b, 1e-12, 100);
    Matrix noise = Matrix::Gaussian(rows, cols, rng, 0.05);
    b += noise;
    double d = SemiOrthogonalDefect(b);
    if (d >= 0.5) continue;
    for (int i = 0; i < 10; ++i) {
      b = SemiOrthogonalStep(b);
      const double d2 = SemiOrthogonalDefect(b);
      EXPECT_LE(d2, d + 1e-15);
      d = d2;
    }
  }
}

TEST(GradCheck, SoftmaxCeClosedForm) {
  LayerStack s;
  s.Emplace<SoftmaxCe>(4);
  dynamic_cast<SoftmaxCe &>(s.back()).SetTargets({2});
  Matrix logits(1, 4, 0.3);
  s.Forward(logits);
  Matrix g = s.Backward(Matrix(1, 1, 1.0));
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(g(0, c), 0.25 - (c == 2 ? 1.0 : 0.0), 1e-15);
  auto rep = GradCheck(s, logits, 1e-8);
  EXPECT_LT(rep.MaxError(), 1e-8);
}

TEST(GradCheck, TwoTdnnfBlocks) {
  Rng rng(21);
  LayerStack s;
  s.Emplace<TdnnfBlock>(6, 3).Init(rng);
  s.Emplace<TdnnfBlock>(6, 3).Init(rng);
  s.Emplace<Affine>(6, 4).Init(rng);
  s.Emplace<SoftmaxCe>(4);
  dynamic_cast<SoftmaxCe &>(s.back()).SetTargets({0, 1, 2, 3, 0, 1, 3});
  auto rep = GradCheck(s, Matrix::Gaussian(7, 6, rng), SeqLayout({4, 3}), 1e-5);
  for (const auto &e : rep.entries) EXPECT_LT(e.max_rel_error, 1e-5) << e.name;
}

TEST(GradCheck, MultiHeadAttentionTwoHeads) {
  Rng rng(22);
  LayerStack s;
  s.Emplace<MultiHeadAttention>(8, 2).Init(rng);
  s.Emplace<Affine>(8, 3).Init(rng);
  s.Emplace<SoftmaxCe>(3);
  dynamic_cast<SoftmaxCe &>(s.back()).SetTargets({0, 1, 2, 1, 0});
  auto rep = GradCheck(s, Matrix::Gaussian(5, 8, rng), 1e-5);
  for (const auto &e : rep.entries) EXPECT_LT(e.max_rel_error, 1e-5) << e.name;
}

TEST(GradCheck, EveryLayerKindOnRandomShapes) {
  Rng rng(2024);
  int cases = 0;
  for (int round = 0; round < 2; ++round)
    for (LayerKind k : testing::AllLayerKinds()) {
      auto pc = testing::MakeProbe(k, rng);
      auto rep = GradCheck(pc.stack, pc.input, pc.layout, 1e-5);
      for (const auto &e : rep.entries) EXPECT_LT(e.max_rel_error, 1e-5) << pc.label << " " << e.name;
      ++cases;
    }
  EXPECT_GE(cases, 20);
}

TEST(Optimizer, ZeroGradientLeavesParamsUnchanged) {
  Rng rng(1);
  Param p("w", Matrix::Gaussian(3, 3, rng));
  const Matrix before = p.value;
  Optimizer adam({&p}, OptimizerConfig{});
  p.grad = Matrix(3, 3, 1.0);
  adam.Step();
  const Matrix mid = p.value;
  EXPECT_FALSE(mid == before);
  p.grad.SetZero();
  adam.Step();
  EXPECT_EQ(p.value, mid);
}

TEST(Optimizer, AdamReducesQuadratic) {
  Param p("w", Matrix(1, 1, 3.0));
  OptimizerConfig cfg;
  cfg.lr = 0.1;
  Optimizer adam({&p}, cfg);
  for (int i = 0; i < 200; ++i) {
    p.grad(0, 0) = 2.0 * p.value(0, 0);
    adam.Step();
  }
  EXPECT_LT(std::abs(p.value(0, 0)), 0.1);
}

TEST(Checkpoint, StackRoundTripsBitExactly) {
  Rng rng(8);
  LayerStack s;
  s.Emplace<Affine>(3, 4).Init(rng);
  s.Emplace<TdnnfBlock>(4, 2).Init(rng);
  s.Emplace<LstmCell>(4, 3, true).Init(rng);
  const auto path = std::filesystem::temp_directory_path() / "a2a_ck_test.bin";
  WriteCheckpoint(path, "TEST", s.Config(), s.Params(), Json{{"seed", 8}});
  Checkpoint ck = ReadCheckpoint(path);
  EXPECT_EQ(ck.kind, "TEST");
  EXPECT_EQ(ck.header.at("seed").get<int>(), 8);
  LayerStack t = LayerStack::FromConfig(ck.config());
  RestoreParams(ck, t.Params());
  auto ps = s.Params(), pt = t.Params();
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(ps[i]->value, pt[i]->value);
  Matrix x = Matrix::Gaussian(5, 3, rng);
  EXPECT_EQ(s.Forward(x), t.Forward(x));
  std::filesystem::remove(path);
}

TEST(Checkpoint, BadMagicRejected) {
  const auto path = std::filesystem::temp_directory_path() / "a2a_ck_bad.bin";
  std::ofstream(path) << "NOPE";
  EXPECT_THROW(ReadCheckpoint(path), Error);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace a2a
