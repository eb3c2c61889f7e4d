// a2a/recognizer/decode.hpp

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
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "a2a/recognizer/ctc.hpp"
#include "a2a/recognizer/lm.hpp"

namespace a2a::recognizer {

struct Hypothesis {
  std::vector<int> tokens;
  double acoustic = 0.0;
  double lm = 0.0;
  double rescore = 0.0;
  double combined = 0.0;  // score the list is currently sorted by
};

struct NBestList {
  std::string utt_id;
  std::vector<Hypothesis> hyps;

  const Hypothesis &Best() const {
    Require(!hyps.empty(), "NBestList: empty list for " + utt_id);
    return hyps.front();
  }
  void Sort() {
    std::stable_sort(hyps.begin(), hyps.end(),
                     [](const Hypothesis &a, const Hypothesis &b) { return a.combined > b.combined; });
  }
};

struct BeamConfig {
  std::size_t beam = 16;
  std::size_t nbest = 10;
  double lm_weight = 1.0;
  double insertion_penalty = 0.0;  // added per token
  std::size_t min_duration = 1;    // frames a token must last before advancing (TDNN-F only)

  Json ToJson() const {
    return {{"beam", beam}, {"nbest", nbest}, {"lm_weight", lm_weight}, {"insertion_penalty", insertion_penalty},
            {"min_duration", min_duration}};
  }
  static BeamConfig FromJson(const Json &j) {
    BeamConfig c;
    ConfigReader r(j, "decode");
    r.Get("beam", c.beam).Get("nbest", c.nbest).Get("lm_weight", c.lm_weight);
    r.Get("insertion_penalty", c.insertion_penalty).Get("min_duration", c.min_duration);
    r.Finish();
    if (c.beam == 0 || c.nbest == 0 || c.min_duration == 0) throw ConfigError("decode: beam, nbest, min_duration must be positive");
    return c;
  }
};

/// Beam search over frame log posteriors where each frame either stays in
/// the current token or advances to a different one. LM scores are added
/// at token boundaries and at the end.
inline NBestList DecodeFrames(const Matrix &log_post, const BigramLm &lm, const BeamConfig &cfg,
                              const std::string &utt_id = "") {
  Require(log_post.rows() > 0, "decode: empty input");
  RequireShape(log_post.cols() == lm.num_tokens(), "decode: posterior width does not match LM inventory");
  struct State {
    std::vector<int> tokens;
    std::size_t dur = 0;
    double ac = 0.0, lm = 0.0;
  };
  const std::size_t K = log_post.cols();
  auto score = [&](const State &s) {
    return s.ac + cfg.lm_weight * s.lm + cfg.insertion_penalty * static_cast<double>(s.tokens.size());
  };
  std::vector<State> beam;
  for (std::size_t k = 0; k < K; ++k)
    beam.push_back({{static_cast<int>(k)}, 1, log_post(0, k), lm.LogProb(lm.boundary(), static_cast<int>(k))});

  auto prune = [&](std::vector<State> &cand) {
    // recombine identical (tokens, capped duration) keeping the best
    std::map<std::pair<std::vector<int>, std::size_t>, std::size_t> seen;
    std::vector<State> uniq;
    for (auto &s : cand) {
      auto key = std::make_pair(s.tokens, std::min(s.dur, cfg.min_duration));
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(std::move(key), uniq.size());
        uniq.push_back(std::move(s));
      } else if (score(s) > score(uniq[it->second])) {
        uniq[it->second] = std::move(s);
      }
    }
    std::stable_sort(uniq.begin(), uniq.end(), [&](const State &a, const State &b) { return score(a) > score(b); });
    if (uniq.size() > cfg.beam) uniq.resize(cfg.beam);
    cand = std::move(uniq);
  };
  prune(beam);

  for (std::size_t t = 1; t < log_post.rows(); ++t) {
    std::vector<State> next;
    next.reserve(beam.size() * K);
    for (const State &s : beam) {
      const int cur = s.tokens.back();
      State stay = s;
      stay.dur += 1;
      stay.ac += log_post(t, static_cast<std::size_t>(cur));
      next.push_back(std::move(stay));
      if (s.dur < cfg.min_duration) continue;
      for (std::size_t k = 0; k < K; ++k) {
        if (static_cast<int>(k) == cur) continue;
        State adv = s;
        adv.tokens.push_back(static_cast<int>(k));
        adv.dur = 1;
        adv.ac += log_post(t, k);
        adv.lm += lm.LogProb(cur, static_cast<int>(k));
        next.push_back(std::move(adv));
      }
    }
    prune(next);
    beam = std::move(next);
  }

  NBestList out;
  out.utt_id = utt_id;
  std::map<std::vector<int>, std::size_t> seen;
  for (const State &s : beam) {
    if (s.dur < cfg.min_duration) continue;
    Hypothesis h;
    h.tokens = s.tokens;
    h.acoustic = s.ac;
    h.lm = s.lm + lm.LogProb(s.tokens.back(), lm.boundary());
    h.combined = h.acoustic + cfg.lm_weight * h.lm + cfg.insertion_penalty * static_cast<double>(h.tokens.size());
    auto it = seen.find(h.tokens);
    if (it == seen.end()) {
      seen.emplace(h.tokens, out.hyps.size());
      out.hyps.push_back(std::move(h));
    } else if (h.combined > out.hyps[it->second].combined) {
      out.hyps[it->second] = std::move(h);
    }
  }
  Require(!out.hyps.empty(), "decode: no complete hypothesis survived for " + utt_id);
  out.Sort();
  if (out.hyps.size() > cfg.nbest) out.hyps.resize(cfg.nbest);
  return out;
}

/// CTC prefix beam search with the bigram LM applied on token emission.
inline NBestList CtcPrefixBeamSearch(const Matrix &log_probs, int blank, const BigramLm &lm, const BeamConfig &cfg,
                                     const std::string &utt_id = "") {
  Require(log_probs.rows() > 0, "decode: empty input");
  RequireShape(log_probs.cols() == lm.num_tokens() + 1, "decode: CTC width must be LM inventory plus blank");
  struct Entry {
    double pb = kLogZero, pnb = kLogZero, lm = 0.0;
  };
  using Prefix = std::vector<int>;
  auto total = [](const Entry &e) { return LogAdd(e.pb, e.pnb); };
  auto score = [&](const Prefix &p, const Entry &e) {
    return total(e) + cfg.lm_weight * e.lm + cfg.insertion_penalty * static_cast<double>(p.size());
  };
  std::map<Prefix, Entry> beam;
  beam[{}] = Entry{0.0, kLogZero, 0.0};
  const std::size_t K = log_probs.cols();
  for (std::size_t t = 0; t < log_probs.rows(); ++t) {
    std::map<Prefix, Entry> next;
    for (const auto &[prefix, e] : beam) {
      const double tot = total(e);
      // blank keeps the prefix
      Entry &nb = next.try_emplace(prefix, Entry{kLogZero, kLogZero, e.lm}).first->second;
      nb.pb = LogAdd(nb.pb, tot + log_probs(t, static_cast<std::size_t>(blank)));
      const int last = prefix.empty() ? -1 : prefix.back();
      for (std::size_t k = 0; k < K; ++k) {
        const int tok = static_cast<int>(k);
        if (tok == blank) continue;
        const double lp = log_probs(t, k);
        if (tok == last) {
          // repeat without a blank collapses into the same prefix
          Entry &same = next.try_emplace(prefix, Entry{kLogZero, kLogZero, e.lm}).first->second;
          same.pnb = LogAdd(same.pnb, e.pnb + lp);
          Prefix ext = prefix;
          ext.push_back(tok);
          Entry &x = next.try_emplace(ext, Entry{kLogZero, kLogZero, e.lm + lm.LogProb(last, tok)}).first->second;
          x.pnb = LogAdd(x.pnb, e.pb + lp);
        } else {
          Prefix ext = prefix;
          ext.push_back(tok);
          const int prev = prefix.empty() ? lm.boundary() : last;
          Entry &x = next.try_emplace(ext, Entry{kLogZero, kLogZero, e.lm + lm.LogProb(prev, tok)}).first->second;
          x.pnb = LogAdd(x.pnb, tot + lp);
        }
      }
    }
    std::vector<std::pair<double, Prefix>> ranked;
    for (const auto &[p, e] : next) ranked.emplace_back(score(p, e), p);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) { return a.first > b.first; });
    if (ranked.size() > cfg.beam) ranked.resize(cfg.beam);
    beam.clear();
    for (auto &[s, p] : ranked) beam.emplace(p, next.at(p));
  }
  NBestList out;
  out.utt_id = utt_id;
  for (const auto &[p, e] : beam) {
    if (p.empty()) continue;
    Hypothesis h;
    h.tokens = p;
    h.acoustic = total(e);
    h.lm = lm.Score(p);
    h.combined = h.acoustic + cfg.lm_weight * h.lm + cfg.insertion_penalty * static_cast<double>(p.size());
    out.hyps.push_back(std::move(h));
  }
  Require(!out.hyps.empty(), "decode: CTC search produced no tokens for " + utt_id);
  out.Sort();
  if (out.hyps.size() > cfg.nbest) out.hyps.resize(cfg.nbest);
  return out;
}

/// log p = lambda log p_AA + (1 - lambda) log p_A, renormalized per frame.
/// At the boundaries the matching input is returned unchanged.
inline Matrix ScoreFuse(const Matrix &log_post_a, const Matrix &log_post_aa, double lambda) {
  RequireShape(log_post_a.SameShape(log_post_aa), "score_fuse: posterior shapes differ");
  Require(lambda >= 0.0 && lambda <= 1.0, "score_fuse: lambda outside [0, 1]");
  if (lambda == 0.0) return log_post_a;
  if (lambda == 1.0) return log_post_aa;
  Matrix out(log_post_a.rows(), log_post_a.cols());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = lambda * log_post_aa.data()[i] + (1.0 - lambda) * log_post_a.data()[i];
  LogSoftmaxRowsInPlace(out);
  return out;
}

/// combined = mu * first-pass combined + (1 - mu) * CTC log probability of
/// the hypothesis under `ctc_log_probs`; the list is re-sorted.
inline NBestList Rescore2Pass(const NBestList &nbest, const Matrix &ctc_log_probs, int blank, double mu) {
  Require(!nbest.hyps.empty(), "rescore_2pass: empty N-best for " + nbest.utt_id);
  Require(mu >= 0.0 && mu <= 1.0, "rescore_2pass: mu outside [0, 1]");
  NBestList out = nbest;
  for (auto &h : out.hyps) {
    h.rescore = CtcLogProb(ctc_log_probs, h.tokens, blank);
    const double first = h.combined;
    h.combined = mu == 1.0 ? first : mu * first + (1.0 - mu) * h.rescore;
  }
  out.Sort();
  return out;
}

/// "utt_id rank acoustic_score lm_score rescore_score token token ..."
inline void WriteNBest(std::ostream &os, const NBestList &list) {
  for (std::size_t r = 0; r < list.hyps.size(); ++r) {
    const auto &h = list.hyps[r];
    os << list.utt_id << ' ' << r + 1 << ' ' << std::setprecision(17) << h.acoustic << ' ' << h.lm << ' '
       << h.rescore;
    for (int t : h.tokens) os << ' ' << t;
    os << '\n';
  }
}

/// Reads lists back; the combined score is restored with the weights of
/// the search that produced them.
inline std::vector<NBestList> ReadNBest(std::istream &is, const BeamConfig &cfg = {}) {
  std::vector<NBestList> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id, ac, lmv, rs;
    std::size_t rank = 0;
    Hypothesis h;
    if (!(ls >> id >> rank >> ac >> lmv >> rs)) throw Error("malformed N-best line: " + line);
    try {
      // strtod also accepts the "-inf" written for infeasible CTC rescores
      h.acoustic = std::stod(ac);
      h.lm = std::stod(lmv);
      h.rescore = std::stod(rs);
    } catch (const std::exception &) {
      throw Error("malformed N-best score: " + line);
    }
    for (int t; ls >> t;) h.tokens.push_back(t);
    h.combined = h.acoustic + cfg.lm_weight * h.lm + cfg.insertion_penalty * static_cast<double>(h.tokens.size());
    if (out.empty() || out.back().utt_id != id) out.push_back({id, {}});
    out.back().hyps.push_back(std::move(h));
  }
  return out;
}

}  // namespace a2a::recognizer
