// a2a/tests/acceptance/acceptance_main.cc

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

// Acceptance runner. Runs the default pipeline twice plus a SRC-only run,
// then prints one PASS/FAIL line per criterion. Exit status is 0 when every
// check ran to completion; --strict also fails on any FAIL line.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "a2a/cli/workspace.hpp"
#include "a2a/evalviz.hpp"
#include "a2a/featex.hpp"
#include "a2a/numcore.hpp"
#include "a2a/recognizer.hpp"
#include "support/layer_cases.hpp"

namespace fs = std::filesystem;
using namespace a2a;

namespace {

struct Line {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Line> g_lines;

void Report(int id, bool pass, const std::string &detail) {
  g_lines.push_back({id, pass, detail});
  std::cout << "criterion " << std::setw(2) << id << ": " << (pass ? "PASS" : "FAIL") << "  " << detail
            << std::endl;
}

std::string Fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

double Seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Pipeline runs

struct RunDir {
  fs::path root;
  Json summary;
  double total_seconds = 0.0;
};

RunDir RunTool(const fs::path &out, const std::string &config, bool reuse) {
  RunDir r{out, {}, 0.0};
  if (!(reuse && fs::exists(out / "summary.json"))) {
    fs::remove_all(out);
    std::string cmd = std::string("\"") + A2A_TOOL_PATH + "\" pipeline --out \"" + out.string() + "\"";
    if (!config.empty()) cmd += " --config \"" + config + "\"";
    cmd += " > \"" + out.string() + ".log\" 2>&1";
    std::cout << "running: " << cmd << std::endl;
    if (std::system(cmd.c_str()) != 0) throw Error("pipeline failed, see " + out.string() + ".log");
  }
  r.summary = cli::ReadJsonFile(out / "summary.json");
  r.total_seconds = cli::ReadJsonFile(out / "timing.json").at("total_seconds").get<double>();
  return r;
}

Json ReadReport(const RunDir &r, const std::string &name) { return cli::ReadJsonFile(r.root / "reports" / name); }

double Wer(const RunDir &r, const std::string &key, const std::string &split) {
  return r.summary.at("wer").at(key).at(split).get<double>();
}

/// Every artifact except wall-clock fields must match byte for byte.
std::vector<std::string> Differences(const fs::path &a, const fs::path &b) {
  std::vector<std::string> diffs;
  std::map<std::string, fs::path> fa, fb;
  for (const auto &[root, files] : {std::pair{a, &fa}, std::pair{b, &fb}})
    for (const auto &e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) (*files)[fs::relative(e.path(), root).generic_string()] = e.path();
  for (const auto &[rel, pa] : fa) {
    if (rel == "timing.json") continue;
    auto it = fb.find(rel);
    if (it == fb.end()) {
      diffs.push_back("missing " + rel);
      continue;
    }
    if (rel.rfind("manifests/", 0) == 0) {
      Json ja = cli::ReadJsonFile(pa), jb = cli::ReadJsonFile(it->second);
      ja.erase("wall_seconds");
      jb.erase("wall_seconds");
      if (ja != jb) diffs.push_back(rel);
    } else if (cli::ReadFileBytes(pa) != cli::ReadFileBytes(it->second)) {
      diffs.push_back(rel);
    }
  }
  for (const auto &[rel, pb] : fb)
    if (!fa.count(rel)) diffs.push_back("extra " + rel);
  return diffs;
}

// ---------------------------------------------------------------------------
// In-process checks

void GradientSuite() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2026);
  double worst = 0.0;
  std::string worst_case;
  int shapes = 0;
  while (shapes < 24)
    for (LayerKind k : testing::AllLayerKinds()) {
      auto pc = testing::MakeProbe(k, rng);
      const auto rep = GradCheck(pc.stack, pc.input, pc.layout, 1e-5);
      if (rep.MaxError() >= worst) {
        worst = rep.MaxError();
        worst_case = pc.label;
      }
      ++shapes;
    }
  const double secs = Seconds(t0);
  Report(1, worst < 1e-5 && shapes >= 20 && secs < 60.0,
         StrCat("max rel error ", Fmt(worst), " (", worst_case, ") over ", shapes, " shapes, ", Fmt(secs, 3),
                " s"));
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

void DctChecks() {
  Rng rng(11);
  featex::DctCodec full(64, 64);
  const Matrix f = Matrix::Gaussian(64, 64, rng, 1.0);
  Matrix back = full.Decode(full.Encode(f));
  back.AddScaled(f, -1.0);
  const double round_trip = back.FrobeniusNorm();

  featex::DctCodec two(2, 2);
  const Matrix g{{0.3, -1.2}, {2.5, 0.7}};
  const Matrix c = two.Encode(g);
  double brute = 0.0;
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) brute = std::max(brute, std::abs(c(0, k * 2 + l) - BruteDct2(g, k, l)));

  const std::size_t len = featex::DctCodec().Encode(Matrix::Gaussian(64, 64, rng, 1.0)).size();
  Report(2, round_trip < 1e-9 && brute < 1e-12 && len == 144,
         StrCat("round trip ", Fmt(round_trip), ", 2x2 vs definition ", Fmt(brute), ", length ", len));
}

void SemiOrthogonality(const RunDir &run) {
  Rng rng(5);
  Matrix b = Matrix::Gaussian(4, 8, rng, 1.0 / std::sqrt(8.0));
  for (int i = 0; i < 20; ++i) b = SemiOrthogonalStep(b);
  const double unit = SemiOrthogonalDefect(b);
  double trained = 0.0;
  std::size_t systems = 0;
  for (const auto &[key, v] : run.summary.at("semi_orth_defect").items()) {
    trained = std::max(trained, v.get<double>());
    ++systems;
  }
  Report(3, systems > 0 && trained < 1e-2 && unit < 1e-3,
         StrCat("max trained defect ", Fmt(trained), " over ", systems, " TDNN-F systems, unit 20-step ",
                Fmt(unit)));
}

void SrcTrend(const RunDir &run, const RunDir &src_only) {
  const double asr = Wer(run, "SRC.asr", "eval"), oracle = Wer(run, "SRC.aasr_oracle", "eval"),
               inv = Wer(run, "SRC.aasr_inv", "eval");
  const bool ok = oracle < asr && std::abs(inv - oracle) <= 1.0 && src_only.total_seconds <= 600.0;
  Report(4, ok,
         StrCat("SRC eval WER asr ", Fmt(asr), ", oracle ", Fmt(oracle), ", inverted ", Fmt(inv),
                ", SRC-only pipeline ", Fmt(src_only.total_seconds, 4), " s"));
}

void MlanChecks(const RunDir &run) {
  const Json inv = ReadReport(run, "inversion.json");
  bool ok = true;
  std::string detail;
  for (const auto &[t, m] : run.summary.at("mismatch").items()) {
    const double drop = m.at("auc_drop").get<double>();
    const double raw = inv.at(t).at("rmse_raw_vs_truth").get<double>();
    const double with = inv.at(t).at("rmse_mlan_vs_truth").get<double>();
    ok = ok && drop >= 0.05 && with < raw;
    detail += StrCat(t, " AUC ", Fmt(m.at("raw_auc").get<double>()), "->", Fmt(m.at("mlan_auc").get<double>()),
                     " (drop ", Fmt(drop), "), RMSE raw ", Fmt(raw), " mlan ", Fmt(with), "; ");
  }
  Report(5, ok, detail);
}

void TargetTrend(const RunDir &run) {
  bool ok = true;
  std::string detail;
  for (const std::string t : {"TGT_A", "TGT_B"}) {
    const double asr = Wer(run, t + ".asr", "eval"), aa = Wer(run, t + ".aasr_mlan", "eval");
    const double asr_aug = Wer(run, t + ".asr_aug", "eval"), aa_aug = Wer(run, t + ".aasr_mlan_aug", "eval");
    ok = ok && aa <= asr && aa_aug <= asr_aug;
    detail += StrCat(t, " asr ", Fmt(asr), " aasr_mlan ", Fmt(aa), " | aug ", Fmt(asr_aug), " ", Fmt(aa_aug), "; ");
  }
  Report(6, ok, detail);
}

void LhucChecks(const RunDir &run) {
  const Json s = run.summary.at("lhuc_scaled_speaker");
  const double before = s.at("wer_before").get<double>(), after = s.at("wer_after").get<double>();
  const bool exact = s.at("zero_alpha_bit_exact").get<bool>();
  Report(7, exact && after <= before,
         StrCat("zero-alpha bit exact ", exact ? "yes" : "no", ", scaled speaker dev WER ", Fmt(before), " -> ",
                Fmt(after)));
}

void CombinationChecks(const RunDir &run) {
  Rng rng(10);
  Matrix a = Matrix::Gaussian(6, 5, rng, 1.5), aa = Matrix::Gaussian(6, 5, rng, 1.5);
  LogSoftmaxRowsInPlace(a);
  LogSoftmaxRowsInPlace(aa);
  bool boundary = recognizer::ScoreFuse(a, aa, 0.0) == a && recognizer::ScoreFuse(a, aa, 1.0) == aa;
  for (const auto &[d, v] : run.summary.at("fuse").items()) boundary = boundary && v.at("boundary_exact").get<bool>();

  bool rescore = true;
  std::string detail;
  for (const auto &[d, v] : run.summary.at("rescore").items()) {
    const double best = v.at("best_dev_wer").get<double>(), single = v.at("best_single_dev_wer").get<double>();
    rescore = rescore && best <= single + 0.5;
    detail += StrCat(d, " 2-pass ", Fmt(best), " vs single ", Fmt(single), "; ");
  }
  Matrix p{{0.6, 0.4}, {0.6, 0.4}};
  for (auto &x : p.data()) x = std::log(x);
  const double toy = std::exp(recognizer::CtcLogProb(p, {0}, 1));
  const double toy_err = std::abs(toy - 0.84);
  Report(8, boundary && rescore && toy_err < 1e-12,
         StrCat("fuse boundaries exact ", boundary ? "yes" : "no", "; ", detail, "toy CTC ", Fmt(toy, 15)));
}

// Top-down memoized edit cost; shares nothing with the DP table in Align.
std::size_t EditCost(const std::vector<int> &r, const std::vector<int> &h, std::size_t i, std::size_t j,
                     std::vector<int> &memo) {
  int &m = memo[i * 7 + j];
  if (m >= 0) return static_cast<std::size_t>(m);
  std::size_t v;
  if (i == r.size())
    v = h.size() - j;
  else if (j == h.size())
    v = r.size() - i;
  else
    v = std::min({EditCost(r, h, i + 1, j + 1, memo) + (r[i] != h[j]), EditCost(r, h, i + 1, j, memo) + 1,
                  EditCost(r, h, i, j + 1, memo) + 1});
  m = static_cast<int>(v);
  return v;
}

void ScoringChecks() {
  std::vector<std::vector<int>> all{{}};
  for (std::size_t len = 1; len <= 6; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto &s : all)
      if (s.size() == len - 1)
        for (int k = 0; k < 3; ++k) {
          auto e = s;
          e.push_back(k);
          next.push_back(e);
        }
    all.insert(all.end(), next.begin(), next.end());
  }
  std::size_t pairs = 0, mismatches = 0;
  std::vector<int> memo(49);
  for (const auto &r : all)
    for (const auto &h : all) {
      std::fill(memo.begin(), memo.end(), -1);
      if (evalviz::Align(r, h).errors() != EditCost(r, h, 0, 0, memo)) ++mismatches;
      ++pairs;
    }

  std::vector<double> a, b(10, 0.0);
  for (int i = 0; i < 10; ++i) a.push_back(i % 2 == 0 ? 2.0 : 0.0);
  const auto hand = evalviz::Mapsswe(a, b);
  const bool hand_ok = std::abs(hand.z - 3.0) < 1e-3 && std::abs(hand.p - 0.0027) < 1e-3;

  Rng rng(2);
  bool anti = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(20), y(20);
    for (auto &v : x) v = static_cast<double>(rng.UniformInt(0, 5));
    for (auto &v : y) v = static_cast<double>(rng.UniformInt(0, 5));
    const auto xy = evalviz::Mapsswe(x, y), yx = evalviz::Mapsswe(y, x);
    anti = anti && xy.z == -yx.z && xy.p == yx.p;
  }
  Report(9, mismatches == 0 && hand_ok && anti,
         StrCat("WER vs brute force ", pairs - mismatches, "/", pairs, " pairs, MAPSSWE z ", Fmt(hand.z, 6), " p ",
                Fmt(hand.p), ", antisymmetry ", anti ? "exact" : "broken"));
}

void TsneChecks(const RunDir &run) {
  const Json &sil = run.summary.at("silhouette");
  const double src = sil.at("SRC").at("oracle").get<double>();
  bool ok = src > 0.3;
  std::string detail = StrCat("SRC oracle ", Fmt(src), "; ");
  for (const std::string t : {"TGT_A", "TGT_B"}) {
    const double with = sil.at(t).at("inv_mlan").get<double>(), without = sil.at(t).at("inv_raw").get<double>();
    ok = ok && with > without;
    detail += StrCat(t, " mlan ", Fmt(with), " raw ", Fmt(without), "; ");
  }
  Report(10, ok, detail);
}

void Determinism(const RunDir &a, const RunDir &b) {
  const auto diffs = Differences(a.root, b.root);
  std::string detail = StrCat(diffs.size(), " differing artifacts");
  if (!diffs.empty()) detail += " (first: " + diffs.front() + ")";
  detail += StrCat(", pipeline ", Fmt(a.total_seconds, 4), " s and ", Fmt(b.total_seconds, 4), " s on ",
                   std::thread::hardware_concurrency(), " core(s)");
  Report(11, diffs.empty() && a.summary == b.summary && a.total_seconds <= 1800.0, detail);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"a2a acceptance runner"};
  std::string work = "acceptance_runs";
  bool reuse = false, strict = false;
  app.add_option("--work", work, "directory for pipeline runs");
  app.add_flag("--reuse", reuse, "keep finished runs from an earlier invocation");
  app.add_flag("--strict", strict, "exit 1 when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(work);
    const fs::path src_cfg = fs::path(work) / "src_only.json";
    cli::WriteJsonFile(src_cfg, Json{{"domains", {"SRC"}}});

    GradientSuite();
    DctChecks();
    const RunDir first = RunTool(fs::path(work) / "default_1", "", reuse);
    const RunDir second = RunTool(fs::path(work) / "default_2", "", reuse);
    const RunDir src_only = RunTool(fs::path(work) / "src_only", src_cfg.string(), reuse);
    SemiOrthogonality(first);
    SrcTrend(first, src_only);
    MlanChecks(first);
    TargetTrend(first);
    LhucChecks(first);
    CombinationChecks(first);
    ScoringChecks();
    TsneChecks(first);
    Determinism(first, second);
  } catch (const std::exception &e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
  std::size_t passed = 0;
  for (const auto &l : g_lines) passed += l.pass;
  std::cout << passed << "/" << g_lines.size() << " criteria passed" << std::endl;
  return strict && passed != g_lines.size() ? 1 : 0;
}
