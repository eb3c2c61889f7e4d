// a2a/tests/unit/evalviz_test.cc

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

#include <filesystem>
#include <fstream>
#include <functional>

#include "a2a/evalviz.hpp"

namespace a2a::evalviz {
namespace {

// Plain recursive edit distance, independent of the DP table.
std::size_t BruteEditCost(const std::vector<int> &r, std::size_t i, const std::vector<int> &h, std::size_t j) {
  if (i == r.size()) return h.size() - j;
  if (j == h.size()) return r.size() - i;
  return std::min({BruteEditCost(r, i + 1, h, j + 1) + (r[i] != h[j]), BruteEditCost(r, i + 1, h, j) + 1,
                   BruteEditCost(r, i, h, j + 1) + 1});
}

TEST(WerTest, HandExamples) {
  EditCounts same = Align({1, 2, 3}, {1, 2, 3});
  EXPECT_EQ(same.errors(), 0u);
  EXPECT_EQ(same.ref_len, 3u);
  EditCounts c = Align({0, 1, 2}, {0, 2});
  EXPECT_EQ(c.sub, 0u);
  EXPECT_EQ(c.del, 1u);
  EXPECT_EQ(c.ins, 0u);
  EXPECT_NEAR(c.Wer(), 100.0 / 3.0, 1e-12);
  EditCounts e = Align({}, {0});
  EXPECT_EQ(e.ins, 1u);
  EXPECT_EQ(e.ref_len, 0u);
  EXPECT_FALSE(e.defined());
  EXPECT_TRUE(e.ToJson().at("wer_undefined").get<bool>());
}

TEST(WerTest, TiesPreferSubstitution) {
  EditCounts c = Align({0, 1}, {1, 0});
  EXPECT_EQ(c.sub, 2u);
  EXPECT_EQ(c.del + c.ins, 0u);
  c = Align({0}, {1, 2});
  EXPECT_EQ(c.sub, 1u);
  EXPECT_EQ(c.ins, 1u);
}

TEST(WerTest, MatchesBruteForceOnAllShortPairs) {
  Rng rng(1);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<int> r(static_cast<std::size_t>(rng.UniformInt(0, 6))), h(static_cast<std::size_t>(rng.UniformInt(0, 6)));
    for (auto &x : r) x = static_cast<int>(rng.UniformInt(0, 2));
    for (auto &x : h) x = static_cast<int>(rng.UniformInt(0, 2));
    const EditCounts c = Align(r, h);
    EXPECT_EQ(c.errors(), BruteEditCost(r, 0, h, 0));
    EXPECT_EQ(c.ref_len - c.del + c.ins, h.size());
  }
}

TEST(WerTest, ReportSumsUtterances) {
  ScoreReport rep;
  rep.Add({"a", "s1", "SRC", Align({0, 1, 2}, {0, 2})});
  rep.Add({"b", "s2", "SRC", Align({0, 1}, {0, 1, 1})});
  EXPECT_EQ(rep.total.errors(), 2u);
  EXPECT_EQ(rep.total.ref_len, 5u);
  EXPECT_NEAR(rep.Wer(), 40.0, 1e-12);
  EXPECT_EQ(rep.by_speaker.at("s1").del, 1u);
  EXPECT_EQ(rep.by_domain.at("SRC").errors(), 2u);
}

TEST(MapssweTest, HandExamples) {
  SignificanceResult same = Mapsswe({1, 2, 3}, {1, 2, 3});
  EXPECT_EQ(same.z, 0.0);
  EXPECT_EQ(same.p, 1.0);
  EXPECT_FALSE(same.significant);
  SignificanceResult ones = Mapsswe({2, 2, 2, 2}, {1, 1, 1, 1});
  EXPECT_TRUE(std::isinf(ones.z));
  EXPECT_EQ(ones.p, 0.0);
  EXPECT_TRUE(ones.significant);
  std::vector<double> a, b(10, 0.0);
  for (int i = 0; i < 10; ++i) a.push_back(i % 2 == 0 ? 2.0 : 0.0);
  SignificanceResult r = Mapsswe(a, b);
  EXPECT_NEAR(r.mean, 1.0, 1e-15);
  EXPECT_NEAR(r.sd, std::sqrt(10.0 / 9.0), 1e-12);
  EXPECT_NEAR(r.z, 3.0, 1e-12);
  EXPECT_NEAR(r.p, 0.0027, 1e-4);
  EXPECT_TRUE(r.significant);
  EXPECT_THROW(Mapsswe({1}, {2}), Error);
}

TEST(MapssweTest, Antisymmetric) {
  Rng rng(2);
  std::vector<double> a(25), b(25);
  for (auto &x : a) x = static_cast<double>(rng.UniformInt(0, 5));
  for (auto &x : b) x = static_cast<double>(rng.UniformInt(0, 5));
  const SignificanceResult ab = Mapsswe(a, b), ba = Mapsswe(b, a);
  EXPECT_EQ(ab.z, -ba.z);
  EXPECT_EQ(ab.p, ba.p);
}

struct Clusters {
  Matrix x;
  std::vector<std::string> labels, ids;
};

Clusters TwoClusters(std::size_t per, double sep, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Clusters c;
  c.x = Matrix::Gaussian(2 * per, dim, rng);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    const bool second = i >= per;
    if (second) c.x(i, 0) += sep;
    c.labels.push_back(second ? "b" : "a");
    c.ids.push_back(StrCat("u", i));
  }
  return c;
}

TEST(TsneTest, ConditionalRowsSumToOneAndHitPerplexity) {
  Clusters c = TwoClusters(20, 3.0, 5, 3);
  Matrix p = ConditionalAffinities(c.x, 8.0);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0.0, h = 0.0;
    for (double v : p.Row(i)) {
      s += v;
      if (v > 0) h -= v * std::log(v);
    }
    EXPECT_NEAR(s, 1.0, 1e-8);
    EXPECT_NEAR(h, std::log(8.0), 1e-4);
    EXPECT_EQ(p(i, i), 0.0);
  }
  EXPECT_THROW(ConditionalAffinities(Matrix(12, 3, 1.0), 3.0), Error);
}

TEST(TsneTest, KlNonIncreasingAfterExaggeration) {
  Rng rng(4);
  Matrix x = Matrix::Gaussian(60, 10, rng);
  std::vector<std::string> labels(60, "a"), ids(60, "u");
  TsneConfig cfg;
  cfg.perplexity = 10.0;
  cfg.iterations = 600;
  Embedding2D e = Tsne(x, labels, ids, cfg, 5);
  ASSERT_EQ(e.points.size(), 60u);
  const std::size_t n = e.kl.size();
  for (std::size_t i = n - 100; i < n; ++i) EXPECT_LE(e.kl[i], e.kl[i - 1] + 1e-9) << i;
}

TEST(TsneTest, SeparatedClustersGiveHighSilhouette) {
  Clusters c = TwoClusters(40, 10.0, 144, 6);
  TsneConfig cfg;
  cfg.perplexity = 15.0;
  cfg.iterations = 500;
  Embedding2D e = Tsne(c.x, c.labels, c.ids, cfg, 7);
  EXPECT_GT(Silhouette(e), 0.5);
  Embedding2D again = Tsne(c.x, c.labels, c.ids, cfg, 7);
  EXPECT_EQ(EmbeddingCsv(e), EmbeddingCsv(again));
  EXPECT_EQ(EmbeddingCsv(e).substr(0, 17), "x,y,label,utt_id\n");
}

TEST(SilhouetteTest, HandExample) {
  Matrix x{{0.0}, {1.0}, {10.0}, {11.0}};
  // a = 1; b = 10.5 for the outer points, 9.5 for the inner ones.
  const double expect = (2 * (9.5 / 10.5) + 2 * (8.5 / 9.5)) / 4.0;
  EXPECT_NEAR(Silhouette(x, {"p", "p", "q", "q"}), expect, 1e-12);
}

TEST(PlotTest, SvgCirclesAndStability) {
  Embedding2D e;
  e.points = {{0.0, 0.0, "i", "u1"}, {1.0, 2.0, "o", "u2"}, {3.0, 1.0, "x", "u3"}};
  const std::string svg = ScatterSvg(e, "i", "o");
  std::size_t circles = 0;
  for (std::size_t pos = 0; (pos = svg.find("<circle", pos)) != std::string::npos; ++pos) ++circles;
  EXPECT_EQ(circles, 2u);
  EXPECT_NE(svg.find("fill=\"red\""), std::string::npos);
  EXPECT_NE(svg.find("fill=\"green\""), std::string::npos);
  const auto dir = std::filesystem::temp_directory_path() / "a2a_plot_test";
  std::filesystem::create_directories(dir);
  WriteScatterSvg(e, "i", "o", dir / "a.svg");
  WriteScatterSvg(e, "i", "o", dir / "b.svg");
  auto slurp = [](const std::filesystem::path &p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
  };
  EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "b.svg"));
  EXPECT_THROW(WriteScatterSvg(e, "y", "z", dir / "c.svg"), Error);
  EXPECT_FALSE(std::filesystem::exists(dir / "c.svg"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace a2a::evalviz
