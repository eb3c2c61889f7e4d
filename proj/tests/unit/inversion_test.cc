// a2a/tests/unit/inversion_test.cc

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

#include <chrono>
#include <filesystem>

#include "a2a/featex.hpp"
#include "a2a/inversion.hpp"
#include "a2a/synth.hpp"

namespace a2a::inversion {
namespace {

InversionConfig Tiny() {
  InversionConfig c;
  c.layers = 1;
  c.hidden = 8;
  c.output_dim = 3;
  c.max_epochs = 20;
  c.batch_utts = 4;
  c.lr = 1e-2;
  return c;
}

// Targets are a smoothed, nonlinear view of the inputs.
ParallelSet ToyTask(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  ParallelSet s;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t T = 10 + static_cast<std::size_t>(rng.UniformInt(0, 10));
    Matrix x = Matrix::Gaussian(T, 5, rng, 1.0);
    Matrix y(T, 3);
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t p = t > 0 ? t - 1 : 0;
      y(t, 0) = x(t, 0) + 0.5 * x(p, 1);
      y(t, 1) = std::tanh(x(t, 2) - x(t, 3));
      y(t, 2) = x(p, 4);
    }
    s.inputs.push_back(x);
    s.targets.push_back(y);
  }
  return s;
}

TEST(Rmse, Examples) {
  Matrix a{{1.0, 2.0}, {3.0, 4.0}};
  EXPECT_EQ(RmseEval(a, a), 0.0);
  Matrix b = a;
  for (auto &x : b.data()) x += 1.0;
  EXPECT_DOUBLE_EQ(RmseEval(b, a), 1.0);
  EXPECT_THROW(RmseEval(a, Matrix(2, 3)), ShapeError);
}

TEST(Rmse, PerUtteranceAggregationMatches) {
  ParallelSet s = ToyTask(6, 3);
  RmseAccumulator acc;
  long double sse = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Matrix p = s.targets[i];
    p *= 0.5;
    acc.Add(p, s.targets[i]);
    const double r = RmseEval(p, s.targets[i]);
    sse += static_cast<long double>(r) * r * s.targets[i].size();
    n += s.targets[i].size();
  }
  EXPECT_NEAR(acc.Value(), static_cast<double>(std::sqrt(sse / n)), 1e-12);
}

TEST(Inversion, ShapesAndZeroModel) {
  InversionModel m(5, Tiny());
  Rng rng(1);
  m.Init(rng);
  Matrix x = Matrix::Gaussian(13, 5, rng, 1.0);
  EXPECT_EQ(m.Invert(x).rows(), 13u);
  EXPECT_EQ(m.Invert(x).cols(), 3u);
  for (auto *p : m.Params()) p->value.SetZero();
  EXPECT_EQ(m.Invert(x).MaxAbs(), 0.0);
  EXPECT_THROW(m.Invert(Matrix(4, 6)), ShapeError);
}

TEST(Inversion, LearnsToyTaskBetterThanMeanPredictor) {
  ParallelSet train = ToyTask(40, 1), dev = ToyTask(12, 2);
  TrainedInversion r = TrainInversion(train, dev, Tiny(), 7);
  // Mean predictor in z-scored space outputs zeros.
  RmseAccumulator mean_acc;
  for (const auto &y : dev.targets) {
    Matrix z = r.model->target_norm().Apply(y);
    mean_acc.Add(Matrix(z.rows(), z.cols()), z);
  }
  const double model_rmse = EvaluateRmse(*r.model, dev);
  EXPECT_NEAR(model_rmse, r.best_dev_rmse, 1e-12);
  EXPECT_LT(model_rmse, 0.7 * mean_acc.Value());
}

TEST(Inversion, ConstantTargetsCollapseToBias) {
  ParallelSet train = ToyTask(20, 4), dev = ToyTask(6, 5);
  for (auto &y : train.targets) y = Matrix(y.rows(), y.cols(), 0.7);
  for (auto &y : dev.targets) y = Matrix(y.rows(), y.cols(), 0.7);
  InversionConfig c = Tiny();
  c.patience = 20;
  c.batch_utts = 1;
  c.lr = 3e-2;
  TrainedInversion r = TrainInversion(train, dev, c, 3);
  EXPECT_LE(r.log.size(), 20u);
  EXPECT_LT(r.best_dev_rmse, 1e-3);
}

TEST(Inversion, SeededRerunIsIdentical) {
  ParallelSet train = ToyTask(12, 1), dev = ToyTask(4, 2);
  InversionConfig c = Tiny();
  c.max_epochs = 3;
  TrainedInversion a = TrainInversion(train, dev, c, 11), b = TrainInversion(train, dev, c, 11);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].train_rmse, b.log[i].train_rmse);
    EXPECT_EQ(a.log[i].dev_rmse, b.log[i].dev_rmse);
  }
}

TEST(Inversion, CheckpointRoundTripIsBitExact) {
  ParallelSet train = ToyTask(8, 1), dev = ToyTask(3, 2);
  InversionConfig c = Tiny();
  c.max_epochs = 2;
  TrainedInversion r = TrainInversion(train, dev, c, 5);
  const auto p = std::filesystem::temp_directory_path() / "a2a_inv_test.ckpt";
  r.model->Save(p);
  auto l = InversionModel::Load(p);
  EXPECT_EQ(l->Invert(dev.inputs[0]), r.model->Invert(dev.inputs[0]));
  std::filesystem::remove(p);
}

TEST(Inversion, MissingTargetsRejected) {
  ParallelSet train = ToyTask(4, 1), dev = ToyTask(2, 2);
  train.targets.pop_back();
  EXPECT_THROW(TrainInversion(train, dev, Tiny(), 1), Error);
}

TEST(UtiAf, MatchesEncodingRenderedFrames) {
  synth::CorpusConfig cfg;
  cfg.speakers_per_domain = 3;
  synth::SynthWorld w = synth::SynthWorld::Build(1, cfg);
  Rng rng(4);
  synth::UtteranceRecord u = synth::SynthUtterance(w, w.Domain(synth::DomainId::kSrc), w.speakers[0], rng);
  featex::DctCodec codec;
  Matrix af = featex::ArticulatoryFeatures(u, cfg.speckle, codec);
  ASSERT_EQ(af.rows(), u.num_frames());
  ASSERT_EQ(af.cols(), 144u);
  EXPECT_EQ(af, codec.EncodeSequence(u.uti));
}

}  // namespace
}  // namespace a2a::inversion
