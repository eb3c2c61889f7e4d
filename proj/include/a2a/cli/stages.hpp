// a2a/cli/stages.hpp

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
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "a2a/cli/workspace.hpp"
#include "a2a/evalviz.hpp"
#include "a2a/featex.hpp"
#include "a2a/inversion.hpp"
#include "a2a/mlan.hpp"
#include "a2a/recognizer.hpp"
#include "a2a/synth.hpp"

namespace a2a::cli {

using recognizer::AsrUtterance;
using synth::DomainId;
using synth::Split;

// ---------------------------------------------------------------------------
// Shared helpers

inline void Log(const std::string &msg) { std::cerr << msg << std::endl; }

inline std::vector<std::string> Targets(const RunConfig &c) {
  std::vector<std::string> out;
  for (const auto &d : c.domains)
    if (d != "SRC") out.push_back(d);
  return out;
}

inline std::size_t DomainPhones(const synth::Corpus &c, const std::string &dom) {
  return synth::NumPhones(c.world.Domain(synth::ParseDomain(dom)).language);
}

inline std::string AfFile(const std::string &source, const std::string &id) {
  return "af/" + source + "/" + id + ".fseq";
}

/// Loads the corpus written by `gen`, registering its files as inputs.
inline synth::Corpus LoadCorpusInput(Workspace &ws) {
  ws.InTree("corpus");
  return synth::LoadCorpus(ws.Path("corpus"));
}

inline std::vector<std::size_t> Pick(const synth::Corpus &c, const std::string &dom, Split s) {
  return c.Select(synth::ParseDomain(dom), s);
}

/// Recognizer view of one split; `af_source` empty means no articulatory stream.
inline std::vector<AsrUtterance> AsrSet(Workspace &ws, const synth::Corpus &c, const std::string &dom, Split s,
                                        const std::string &af_source) {
  std::vector<AsrUtterance> out;
  for (std::size_t i : Pick(c, dom, s)) {
    const auto &u = c.utts[i];
    AsrUtterance a{u.id, u.speaker, u.fbk, {}, u.labels, u.phones};
    if (!af_source.empty()) a.af = ws.ReadMatrix(AfFile(af_source, u.id));
    out.push_back(std::move(a));
  }
  return out;
}

inline mlan::LabelledSet Labelled(const synth::Corpus &c, const std::string &dom, Split s) {
  mlan::LabelledSet out;
  for (std::size_t i : Pick(c, dom, s)) {
    out.fbk.push_back(c.utts[i].fbk);
    out.labels.push_back(c.utts[i].labels);
  }
  return out;
}

inline Matrix PoolFbk(const synth::Corpus &c, const std::string &dom, Split s,
                      const std::function<Matrix(const Matrix &)> &fn = {}) {
  std::vector<Matrix> parts;
  for (std::size_t i : Pick(c, dom, s)) parts.push_back(fn ? fn(c.utts[i].fbk) : c.utts[i].fbk);
  std::vector<const Matrix *> ptrs;
  for (const auto &m : parts) ptrs.push_back(&m);
  return StackSequences(ptrs).x;
}

// ---------------------------------------------------------------------------
// Recognizer systems

enum class ModelKind { kTdnnf, kConformer };

struct SystemSpec {
  std::string domain;
  std::string name;
  ModelKind kind = ModelKind::kTdnnf;
  std::string af;  // articulatory source, empty for none
  bool augment = false;

  std::string key() const { return domain + "." + name; }
  std::string model_path() const { return "models/asr/" + key() + ".ckpt"; }
};

/// Every recognizer the pipeline trains, in training order.
inline std::vector<SystemSpec> Systems(const RunConfig &c) {
  std::vector<SystemSpec> out;
  for (const auto &d : c.domains) {
    if (d == "SRC") {
      out.push_back({d, "asr", ModelKind::kTdnnf, "", false});
      out.push_back({d, "aasr_oracle", ModelKind::kTdnnf, "oracle", false});
      out.push_back({d, "aasr_inv", ModelKind::kTdnnf, "inv_raw", false});
      out.push_back({d, "conf_inv", ModelKind::kConformer, "inv_raw", false});
    } else {
      out.push_back({d, "asr", ModelKind::kTdnnf, "", false});
      out.push_back({d, "aasr_mlan", ModelKind::kTdnnf, "inv_mlan", false});
      out.push_back({d, "asr_aug", ModelKind::kTdnnf, "", true});
      out.push_back({d, "aasr_mlan_aug", ModelKind::kTdnnf, "inv_mlan", true});
      out.push_back({d, "conf_mlan", ModelKind::kConformer, "inv_mlan", false});
    }
  }
  return out;
}

inline SystemSpec FindSystem(const std::vector<SystemSpec> &all, const std::string &dom,
                              const std::string &name) {
  for (const auto &s : all)
    if (s.domain == dom && s.name == name) return s;
  throw Error("no system " + dom + "." + name);
}

/// Systems joined by frame-level score fusion: (A, AA).
inline std::pair<std::string, std::string> FusePair(const std::string &dom) {
  return dom == "SRC" ? std::pair<std::string, std::string>{"asr", "aasr_inv"}
                      : std::pair<std::string, std::string>{"asr", "aasr_mlan"};
}
inline std::string RescoreSystem(const std::string &dom) { return dom == "SRC" ? "conf_inv" : "conf_mlan"; }
inline std::string LhucSystem() { return "aasr_mlan"; }

/// Speed perturbation of both streams followed by SpecAugment on fbk.
inline recognizer::AugmentFn MakeAugment(const featex::AugmentPolicy &p, std::uint64_t seed) {
  return [p, seed](const AsrUtterance &u, std::size_t, Rng &rng) {
    double f = 1.0;
    if (p.per_speaker_speed) {
      f = p.SpeakerFactor(u.speaker, seed);
    } else if (!p.speed_factors.empty()) {
      f = p.speed_factors[static_cast<std::size_t>(
          rng.UniformInt(0, static_cast<std::int64_t>(p.speed_factors.size()) - 1))];
    }
    AsrUtterance out = u;
    if (f != 1.0) {
      auto sp = featex::SpeedPerturb(u.fbk, u.labels, f);
      out.fbk = std::move(sp.feats);
      out.labels = std::move(sp.labels);
      if (u.af.rows()) out.af = featex::SpeedPerturb(u.af, u.labels, f).feats;
    }
    out.fbk = featex::SpecAugment(out.fbk, p, rng);
    return out;
  };
}

inline Json RecLogJson(const recognizer::RecTrainResult &r) {
  Json epochs = Json::array();
  for (const auto &e : r.log)
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"train_acc", e.train_acc},
                      {"dev_loss", e.dev_loss}, {"dev_acc", e.dev_acc}});
  return {{"epochs", epochs}, {"best_epoch", r.best_epoch}};
}

inline Json DnnLogJson(const mlan::DnnTrainResult &r) {
  Json epochs = Json::array();
  for (const auto &e : r.log)
    epochs.push_back({{"epoch", e.epoch}, {"train_ce", e.train_ce}, {"train_acc", e.train_acc},
                      {"dev_ce", e.dev_ce}, {"dev_acc", e.dev_acc}});
  return {{"epochs", epochs}, {"best_epoch", r.best_epoch}};
}

inline recognizer::BigramLm LoadLm(Workspace &ws, const std::string &dom) {
  return recognizer::BigramLm::FromJson(ws.ReadJson("models/lm/" + dom + ".json"));
}

inline std::string NBestFile(const std::string &key, Split s) {
  return "nbest/" + key + "/" + synth::SplitName(s) + ".txt";
}

inline void WriteNBestFile(Workspace &ws, const std::string &rel, const std::vector<recognizer::NBestList> &lists) {
  std::ofstream os(ws.Out(rel));
  if (!os) throw Error("cannot write " + rel);
  for (const auto &l : lists) recognizer::WriteNBest(os, l);
  if (!os) throw Error("failed writing " + rel);
}

inline std::vector<recognizer::NBestList> ReadNBestFile(Workspace &ws, const std::string &rel,
                                                       const recognizer::BeamConfig &cfg) {
  std::ifstream is(ws.In(rel));
  return recognizer::ReadNBest(is, cfg);
}

/// WER report of first-best hypotheses against the corpus transcripts.
inline evalviz::ScoreReport ScoreLists(const synth::Corpus &c, const std::string &dom, Split s,
                                       const std::vector<recognizer::NBestList> &lists) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < c.utts.size(); ++i) index[c.utts[i].id] = i;
  const auto ids = Pick(c, dom, s);
  Require(lists.size() == ids.size(), StrCat("score: ", lists.size(), " hypotheses for ", ids.size(), " utterances"));
  evalviz::ScoreReport rep;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto &u = c.utts[ids[k]];
    Require(lists[k].utt_id == u.id, "score: N-best order does not match the corpus at " + u.id);
    rep.Add({u.id, u.speaker, dom, evalviz::Align(u.phones, lists[k].Best().tokens)});
  }
  return rep;
}

/// Log posteriors of a TDNN-F system for every utterance, then a parallel
/// beam search over them.
inline std::vector<recognizer::NBestList> DecodeTdnnf(recognizer::TdnnfRecognizer &m,
                                                     const std::vector<AsrUtterance> &set,
                                                     const recognizer::BigramLm &lm,
                                                     const recognizer::BeamConfig &bc,
                                                     const recognizer::LhucState *lhuc = nullptr) {
  std::vector<Matrix> lp;
  for (const auto &u : set) {
    if (lhuc) m.ApplyLhuc(*lhuc, u.speaker);
    lp.push_back(m.LogPosteriors(u.fbk, m.fused() ? &u.af : nullptr));
  }
  if (lhuc) m.ResetLhuc();
  std::vector<recognizer::NBestList> out(set.size());
  ParallelFor(set.size(), [&](std::size_t i) { out[i] = recognizer::DecodeFrames(lp[i], lm, bc, set[i].id); });
  return out;
}

inline std::vector<Matrix> TdnnfPosteriors(recognizer::TdnnfRecognizer &m, const std::vector<AsrUtterance> &set) {
  std::vector<Matrix> lp;
  for (const auto &u : set) lp.push_back(m.LogPosteriors(u.fbk, m.fused() ? &u.af : nullptr));
  return lp;
}

inline std::vector<Matrix> ConformerLogProbs(recognizer::ConformerCtc &m, const std::vector<AsrUtterance> &set) {
  std::vector<Matrix> lp;
  for (const auto &u : set) lp.push_back(m.LogProbs(u.fbk, m.config().fusion ? &u.af : nullptr));
  return lp;
}

inline double FirstBestWer(const synth::Corpus &c, const std::string &dom, Split s,
                           const std::vector<recognizer::NBestList> &lists) {
  return ScoreLists(c, dom, s, lists).Wer();
}

// ---------------------------------------------------------------------------
// Stages

/// gen: synthetic parallel corpus.
inline void StageGen(Workspace &ws) {
  const RunConfig &c = ws.config();
  fs::remove_all(ws.Path("corpus"));
  synth::Corpus corpus = synth::GenerateCorpus(c.corpus, c.seed);
  synth::WriteCorpus(corpus, ws.Path("corpus"));
  ws.OutTree("corpus");
  Json rep;
  for (const auto &d : c.domains)
    for (Split s : {Split::kTrain, Split::kDev, Split::kEval}) {
      std::size_t frames = 0;
      const auto ids = Pick(corpus, d, s);
      for (std::size_t i : ids) frames += corpus.utts[i].num_frames();
      rep[d][synth::SplitName(s)] = {{"utterances", ids.size()}, {"frames", frames}};
    }
  ws.WriteJson("reports/gen.json", rep);
}

/// featex: DCT articulatory features from rendered ultrasound. Source-domain
/// features are the oracle stream; target-domain ones are hidden truth used
/// only for evaluation.
inline void StageFeatex(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  fs::remove_all(ws.Path("af/oracle"));
  fs::remove_all(ws.Path("af/truth"));
  fs::create_directories(ws.Path("af/oracle"));
  fs::create_directories(ws.Path("af/truth"));
  const featex::DctCodec codec(synth::kFrameSize, c.dct_kept);
  std::vector<std::size_t> todo;
  for (const auto &d : c.domains)
    for (std::size_t i : corpus.Select(synth::ParseDomain(d))) todo.push_back(i);
  ParallelFor(todo.size(), [&](std::size_t k) {
    const auto &u = corpus.utts[todo[k]];
    const std::string src = u.domain == DomainId::kSrc ? "oracle" : "truth";
    WriteFeatures(ws.Path(AfFile(src, u.id)), featex::ArticulatoryFeatures(u, c.corpus.speckle, codec));
  });
  ws.OutTree("af/oracle");
  ws.OutTree("af/truth");
  ws.WriteJson("reports/featex.json", {{"af_dim", codec.dim()}, {"utterances", todo.size()}});
}

/// train-mlan: one two-level network per target domain, plus the
/// domain-classifier mismatch on eval frames before and after it.
inline void StageTrainMlan(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  const auto src_tr = Labelled(corpus, "SRC", Split::kTrain), src_dv = Labelled(corpus, "SRC", Split::kDev);
  Json rep = Json::object();
  for (const auto &t : Targets(c)) {
    Log("train-mlan: " + t);
    mlan::TrainedMlan m =
        mlan::TrainMlan(Labelled(corpus, t, Split::kTrain), Labelled(corpus, t, Split::kDev), DomainPhones(corpus, t),
                        src_tr, src_dv, DomainPhones(corpus, "SRC"), c.mlan, DeriveSeed(c.seed, "mlan/" + t));
    m.model->Save(ws.Out("models/mlan_" + t + ".ckpt"));
    auto bn = [&](const Matrix &x) { return m.model->ExtractBottleneck(x); };
    const mlan::MismatchReport raw = mlan::ComputeMismatch(PoolFbk(corpus, "SRC", Split::kEval),
                                                           PoolFbk(corpus, t, Split::kEval),
                                                           DeriveSeed(c.seed, "mismatch/raw/" + t));
    const mlan::MismatchReport after = mlan::ComputeMismatch(PoolFbk(corpus, "SRC", Split::kEval, bn),
                                                             PoolFbk(corpus, t, Split::kEval, bn),
                                                             DeriveSeed(c.seed, "mismatch/mlan/" + t));
    rep[t] = {{"raw", raw.ToJson()},
              {"mlan", after.ToJson()},
              {"auc_drop", raw.auc - after.auc},
              {"level1", DnnLogJson(m.level1_log)},
              {"level2", DnnLogJson(m.level2_log)}};
  }
  ws.WriteJson("reports/mlan.json", rep);
}

namespace stage_detail {

inline inversion::ParallelSet InversionSet(Workspace &ws, const synth::Corpus &corpus, Split s,
                                           const std::function<Matrix(const Matrix &)> &input) {
  inversion::ParallelSet out;
  for (std::size_t i : Pick(corpus, "SRC", s)) {
    out.inputs.push_back(input(corpus.utts[i].fbk));
    out.targets.push_back(ws.ReadMatrix(AfFile("oracle", corpus.utts[i].id)));
  }
  return out;
}

inline Json InversionLogJson(const inversion::TrainedInversion &r) {
  Json epochs = Json::array();
  for (const auto &e : r.log)
    epochs.push_back({{"epoch", e.epoch}, {"train_rmse", e.train_rmse}, {"dev_rmse", e.dev_rmse}});
  return {{"epochs", epochs}, {"best_epoch", r.best_epoch}, {"best_dev_rmse", r.best_dev_rmse}};
}

}  // namespace stage_detail

/// train-inv: source-domain inversion from spliced fbk, and one per target
/// from that target's MLAN bottleneck features.
inline void StageTrainInv(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  Json rep = Json::object();
  auto train = [&](const std::string &name, const std::function<Matrix(const Matrix &)> &input) {
    Log("train-inv: " + name);
    const auto tr = stage_detail::InversionSet(ws, corpus, Split::kTrain, input);
    const auto dv = stage_detail::InversionSet(ws, corpus, Split::kDev, input);
    inversion::TrainedInversion r =
        inversion::TrainInversion(tr, dv, c.inversion, DeriveSeed(c.seed, "inv/" + name), "SRC/train");
    r.model->Save(ws.Out("models/" + name + ".ckpt"));
    rep[name] = stage_detail::InversionLogJson(r);
  };
  train("inv_raw", [&](const Matrix &x) { return featex::Splice(x, c.splice_context); });
  for (const auto &t : Targets(c)) {
    auto m = mlan::MlanModel::Load(ws.In("models/mlan_" + t + ".ckpt"));
    train("inv_mlan_" + t, [&](const Matrix &x) { return m->ExtractBottleneck(x); });
  }
  ws.WriteJson("reports/train_inv.json", rep);
}

/// invert: articulatory features for recognizers, and inversion RMSE against
/// the oracle (source) or hidden truth (targets) in the model's z-scored space.
inline void StageInvert(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  fs::remove_all(ws.Path("af/inv_raw"));
  fs::remove_all(ws.Path("af/inv_mlan"));
  Json rep = Json::object();

  // returns RMSE on the eval split against `ref_source`
  auto run = [&](inversion::InversionModel &model, const std::string &dom, const std::string &out_source,
                 const std::string &ref_source, const std::function<Matrix(const Matrix &)> &input) {
    const auto ids = corpus.Select(synth::ParseDomain(dom));
    std::vector<Matrix> xs;
    for (std::size_t i : ids) xs.push_back(input(corpus.utts[i].fbk));
    std::vector<Matrix> pred = inversion::InvertAll(model, xs);
    inversion::RmseAccumulator acc;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto &u = corpus.utts[ids[k]];
      pred[k] = QuantizeF32(std::move(pred[k]));
      ws.WriteMatrix(AfFile(out_source, u.id), pred[k]);
      if (corpus.splits[ids[k]] == Split::kEval)
        acc.Add(pred[k], model.target_norm().Apply(ws.ReadMatrix(AfFile(ref_source, u.id))));
    }
    return acc.Value();
  };

  auto raw = inversion::InversionModel::Load(ws.In("models/inv_raw.ckpt"));
  auto splice = [&](const Matrix &x) { return featex::Splice(x, c.splice_context); };
  Log("invert: inv_raw");
  rep["SRC"] = {{"rmse_raw_vs_oracle", run(*raw, "SRC", "inv_raw", "oracle", splice)}};
  for (const auto &t : Targets(c)) {
    Log("invert: " + t);
    auto ml = mlan::MlanModel::Load(ws.In("models/mlan_" + t + ".ckpt"));
    auto inv = inversion::InversionModel::Load(ws.In("models/inv_mlan_" + t + ".ckpt"));
    const double r_raw = run(*raw, t, "inv_raw", "truth", splice);
    const double r_mlan = run(*inv, t, "inv_mlan", "truth", [&](const Matrix &x) { return ml->ExtractBottleneck(x); });
    rep[t] = {{"rmse_raw_vs_truth", r_raw}, {"rmse_mlan_vs_truth", r_mlan}};
  }
  ws.WriteJson("reports/inversion.json", rep);
}

/// Trains one recognizer system and saves it; returns its report entry.
inline Json TrainSystem(Workspace &ws, const synth::Corpus &corpus, const SystemSpec &s) {
  const RunConfig &c = ws.config();
  Log("train-asr: " + s.key());
  const auto tr = AsrSet(ws, corpus, s.domain, Split::kTrain, s.af);
  const auto dv = AsrSet(ws, corpus, s.domain, Split::kDev, s.af);
  const std::uint64_t seed = DeriveSeed(c.seed, "asr/" + s.key());
  const auto aug = s.augment ? MakeAugment(c.augment, seed) : recognizer::AugmentFn{};
  const std::size_t af_dim = c.dct_kept * c.dct_kept;
  if (s.kind == ModelKind::kTdnnf) {
    recognizer::TdnnfConfig mc = c.tdnnf;
    mc.num_phones = DomainPhones(corpus, s.domain);
    mc.fusion.enabled = !s.af.empty();
    mc.fusion.af_dim = af_dim;
    recognizer::TdnnfRecognizer m(mc);
    auto r = recognizer::TrainTdnnf(m, tr, dv, c.train_tdnnf, seed, s.domain + "/train", {}, aug);
    m.Save(ws.Out(s.model_path()));
    return {{"log", RecLogJson(r)}, {"max_semi_orth_defect", m.MaxSemiOrthogonalDefect()}};
  }
  recognizer::ConformerConfig mc = c.conformer;
  mc.num_phones = DomainPhones(corpus, s.domain);
  mc.fusion = !s.af.empty();
  mc.af_dim = af_dim;
  recognizer::ConformerCtc m(mc);
  auto r = recognizer::TrainConformer(m, tr, dv, c.train_conformer, seed, s.domain + "/train", {}, aug);
  m.Save(ws.Out(s.model_path()));
  return {{"log", RecLogJson(r)}};
}

/// train-asr: bigram LMs and every recognizer system.
inline void StageTrainAsr(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  for (const auto &d : c.domains) {
    std::vector<std::vector<int>> tr;
    for (std::size_t i : Pick(corpus, d, Split::kTrain)) tr.push_back(corpus.utts[i].phones);
    ws.WriteJson("models/lm/" + d + ".json", recognizer::BigramLm::Train(DomainPhones(corpus, d), tr).ToJson());
  }
  Json rep = Json::object();
  for (const auto &s : Systems(c)) rep[s.key()] = TrainSystem(ws, corpus, s);
  ws.WriteJson("reports/train_asr.json", rep);
}

/// adapt-lhuc: (1) supervised adaptation on a source dev speaker whose
/// features are scaled, scored on held-out utterances of that speaker;
/// (2) unsupervised test-time adaptation of each target AASR to every dev
/// and eval speaker from first-pass labels.
inline void StageAdaptLhuc(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  Json rep = Json::object();
  {
    const std::string path = FindSystem(Systems(c), "SRC", "asr").model_path();
    auto m = recognizer::TdnnfRecognizer::Load(ws.In(path));
    const auto lm = LoadLm(ws, "SRC");
    auto dev = AsrSet(ws, corpus, "SRC", Split::kDev, "");
    const std::string spk = dev.front().speaker;
    std::vector<AsrUtterance> adapt, test;
    std::size_t k = 0;
    for (auto &u : dev) {
      if (u.speaker != spk) continue;
      u.fbk *= c.lhuc_probe.feature_scale;
      (k++ % 2 == 0 ? adapt : test).push_back(u);
    }
    auto wer = [&](const std::vector<AsrUtterance> &set, const recognizer::LhucState *st) {
      const auto lists = DecodeTdnnf(*m, set, lm, c.decode, st);
      evalviz::ScoreReport r;
      for (std::size_t i = 0; i < set.size(); ++i)
        r.Add({set[i].id, set[i].speaker, "SRC", evalviz::Align(set[i].tokens, lists[i].Best().tokens)});
      return r.Wer();
    };
    const AsrUtterance &probe = test.front();
    const Matrix before_lp = m->LogPosteriors(probe.fbk, nullptr);
    const double before = wer(test, nullptr);
    recognizer::LhucState state;
    recognizer::LhucAdapt(*m, spk, adapt, c.lhuc, DeriveSeed(c.seed, "lhuc/probe"), state);
    const double after = wer(test, &state);
    m->ApplyLhuc(state, spk);
    const bool moved = m->LogPosteriors(probe.fbk, nullptr) != before_lp;
    m->ResetLhuc();
    const bool zero_exact = m->LogPosteriors(probe.fbk, nullptr) == before_lp;
    ws.WriteJson("models/lhuc/SRC.asr.scaled.json", state.ToJson());
    rep["scaled_speaker"] = {{"speaker", spk},
                             {"feature_scale", c.lhuc_probe.feature_scale},
                             {"adapt_utts", adapt.size()},
                             {"test_utts", test.size()},
                             {"wer_before", before},
                             {"wer_after", after},
                             {"adapted_outputs_differ", moved},
                             {"zero_alpha_bit_exact", zero_exact}};
  }
  for (const auto &t : Targets(c)) {
    const SystemSpec s = FindSystem(Systems(c), t, LhucSystem());
    Log("adapt-lhuc: " + s.key());
    auto m = recognizer::TdnnfRecognizer::Load(ws.In(s.model_path()));
    recognizer::LhucState state;
    std::vector<std::string> speakers;
    for (Split sp : {Split::kDev, Split::kEval}) {
      auto set = AsrSet(ws, corpus, t, sp, s.af);
      std::map<std::string, std::vector<AsrUtterance>> by_spk;
      for (auto &u : set) {
        u.labels = recognizer::FirstPassLabels(*m, u);
        by_spk[u.speaker].push_back(std::move(u));
      }
      for (auto &[spk, utts] : by_spk) {
        recognizer::LhucAdapt(*m, spk, utts, c.lhuc, DeriveSeed(c.seed, "lhuc/" + s.key() + "/" + spk), state);
        m->ResetLhuc();
        speakers.push_back(spk);
      }
    }
    ws.WriteJson("models/lhuc/" + s.key() + ".json", state.ToJson());
    rep[s.key()] = {{"speakers", speakers}};
  }
  ws.WriteJson("reports/lhuc.json", rep);
}

/// decode: N-best lists for every system on dev and eval, plus the
/// test-time LHUC variant of each target AASR.
inline void StageDecode(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  for (const auto &s : Systems(c)) {
    Log("decode: " + s.key());
    const auto lm = LoadLm(ws, s.domain);
    for (Split sp : {Split::kDev, Split::kEval}) {
      const auto set = AsrSet(ws, corpus, s.domain, sp, s.af);
      if (s.kind == ModelKind::kTdnnf) {
        auto m = recognizer::TdnnfRecognizer::Load(ws.In(s.model_path()));
        WriteNBestFile(ws, NBestFile(s.key(), sp), DecodeTdnnf(*m, set, lm, c.decode));
        if (s.domain != "SRC" && s.name == LhucSystem()) {
          const auto state = recognizer::LhucState::FromJson(ws.ReadJson("models/lhuc/" + s.key() + ".json"));
          WriteNBestFile(ws, NBestFile(s.key() + "_lhuc", sp), DecodeTdnnf(*m, set, lm, c.decode, &state));
        }
      } else {
        auto m = recognizer::ConformerCtc::Load(ws.In(s.model_path()));
        const auto lp = ConformerLogProbs(*m, set);
        std::vector<recognizer::NBestList> out(set.size());
        const int blank = static_cast<int>(m->config().blank());
        ParallelFor(set.size(), [&](std::size_t i) {
          out[i] = recognizer::CtcPrefixBeamSearch(lp[i], blank, lm, c.ctc_decode, set[i].id);
        });
        WriteNBestFile(ws, NBestFile(s.key(), sp), out);
      }
    }
  }
}

/// fuse: frame-level score fusion of each domain's ASR and AASR; lambda is
/// picked on dev and applied to eval.
inline void StageFuse(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  const auto systems = Systems(c);
  Json rep = Json::object();
  for (const auto &d : c.domains) {
    Log("fuse: " + d);
    const auto [na, naa] = FusePair(d);
    const SystemSpec &sa = FindSystem(systems, d, na), &saa = FindSystem(systems, d, naa);
    auto ma = recognizer::TdnnfRecognizer::Load(ws.In(sa.model_path()));
    auto maa = recognizer::TdnnfRecognizer::Load(ws.In(saa.model_path()));
    const auto lm = LoadLm(ws, d);
    std::map<Split, std::pair<std::vector<Matrix>, std::vector<Matrix>>> post;
    std::map<Split, std::vector<std::string>> ids;
    for (Split sp : {Split::kDev, Split::kEval}) {
      const auto set = AsrSet(ws, corpus, d, sp, saa.af);
      post[sp] = {TdnnfPosteriors(*ma, set), TdnnfPosteriors(*maa, set)};
      for (const auto &u : set) ids[sp].push_back(u.id);
    }
    auto decode = [&](Split sp, double lambda) {
      const auto &[a, aa] = post[sp];
      std::vector<recognizer::NBestList> out(a.size());
      ParallelFor(a.size(), [&](std::size_t i) {
        out[i] = recognizer::DecodeFrames(recognizer::ScoreFuse(a[i], aa[i], lambda), lm, c.decode, ids[sp][i]);
      });
      return out;
    };
    bool boundary_exact = true;
    for (std::size_t i = 0; i < post[Split::kDev].first.size(); ++i) {
      const auto &[a, aa] = post[Split::kDev];
      boundary_exact = boundary_exact && recognizer::ScoreFuse(a[i], aa[i], 0.0) == a[i] &&
                       recognizer::ScoreFuse(a[i], aa[i], 1.0) == aa[i];
    }
    Json grid = Json::array();
    double best_lambda = c.lambda_grid.front(), best_wer = 0.0;
    for (std::size_t g = 0; g < c.lambda_grid.size(); ++g) {
      const double w = FirstBestWer(corpus, d, Split::kDev, decode(Split::kDev, c.lambda_grid[g]));
      grid.push_back({{"lambda", c.lambda_grid[g]}, {"dev_wer", w}});
      if (g == 0 || w < best_wer) {
        best_wer = w;
        best_lambda = c.lambda_grid[g];
      }
    }
    const std::string key = d + ".fuse";
    for (Split sp : {Split::kDev, Split::kEval}) WriteNBestFile(ws, NBestFile(key, sp), decode(sp, best_lambda));
    rep[d] = {{"parents", {sa.key(), saa.key()}},
              {"grid", grid},
              {"best_lambda", best_lambda},
              {"best_dev_wer", best_wer},
              {"boundary_exact", boundary_exact}};
  }
  ws.WriteJson("reports/fuse.json", rep);
}

/// rescore: conformer CTC second pass over the fused N-best; mu is picked on
/// dev and applied to eval.
inline void StageRescore(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  const auto systems = Systems(c);
  Json rep = Json::object();
  for (const auto &d : c.domains) {
    Log("rescore: " + d);
    const SystemSpec &sc = FindSystem(systems, d, RescoreSystem(d));
    auto conf = recognizer::ConformerCtc::Load(ws.In(sc.model_path()));
    const int blank = static_cast<int>(conf->config().blank());
    std::map<Split, std::vector<recognizer::NBestList>> first;
    std::map<Split, std::vector<Matrix>> ctc;
    for (Split sp : {Split::kDev, Split::kEval}) {
      first[sp] = ReadNBestFile(ws, NBestFile(d + ".fuse", sp), c.decode);
      ctc[sp] = ConformerLogProbs(*conf, AsrSet(ws, corpus, d, sp, sc.af));
    }
    auto rescore = [&](Split sp, double mu) {
      std::vector<recognizer::NBestList> out(first[sp].size());
      ParallelFor(out.size(), [&](std::size_t i) {
        out[i] = recognizer::Rescore2Pass(first[sp][i], ctc[sp][i], blank, mu);
      });
      return out;
    };
    Json grid = Json::array();
    double best_mu = c.mu_grid.front(), best_wer = 0.0;
    for (std::size_t g = 0; g < c.mu_grid.size(); ++g) {
      const double w = FirstBestWer(corpus, d, Split::kDev, rescore(Split::kDev, c.mu_grid[g]));
      grid.push_back({{"mu", c.mu_grid[g]}, {"dev_wer", w}});
      if (g == 0 || w < best_wer) {
        best_wer = w;
        best_mu = c.mu_grid[g];
      }
    }
    // single systems that feed the combination
    Json singles = Json::object();
    double best_single = 0.0;
    bool first_single = true;
    for (const auto &name : {FusePair(d).first, FusePair(d).second, RescoreSystem(d)}) {
      const std::string key = d + "." + name;
      const double w = FirstBestWer(corpus, d, Split::kDev, ReadNBestFile(ws, NBestFile(key, Split::kDev), c.decode));
      singles[key] = w;
      if (first_single || w < best_single) best_single = w;
      first_single = false;
    }
    const std::string key = d + ".2pass";
    for (Split sp : {Split::kDev, Split::kEval}) WriteNBestFile(ws, NBestFile(key, sp), rescore(sp, best_mu));
    rep[d] = {{"first_pass", d + ".fuse"},
              {"second_pass", sc.key()},
              {"grid", grid},
              {"best_mu", best_mu},
              {"best_dev_wer", best_wer},
              {"single_dev_wer", singles},
              {"best_single_dev_wer", best_single}};
  }
  ws.WriteJson("reports/rescore.json", rep);
}

/// score: WER of every decoded system and matched-pairs significance of the
/// main comparisons on eval.
inline void StageScore(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  std::set<std::string> keys;
  for (const auto &e : fs::directory_iterator(ws.Path("nbest")))
    if (e.is_directory()) keys.insert(e.path().filename().string());
  Json wer = Json::object(), detail = Json::object();
  std::map<std::string, evalviz::ScoreReport> eval_reports;
  for (const auto &key : keys) {
    const std::string dom = key.substr(0, key.find('.'));
    if (std::find(c.domains.begin(), c.domains.end(), dom) == c.domains.end()) continue;
    for (Split sp : {Split::kDev, Split::kEval}) {
      const auto rep = ScoreLists(corpus, dom, sp, ReadNBestFile(ws, NBestFile(key, sp), c.decode));
      wer[key][synth::SplitName(sp)] = rep.Wer();
      detail[key][synth::SplitName(sp)] = rep.ToJson();
      if (sp == Split::kEval) eval_reports[key] = rep;
    }
  }
  Json sig = Json::object();
  auto compare = [&](const std::string &a, const std::string &b) {
    if (!eval_reports.count(a) || !eval_reports.count(b)) return;
    sig[a + " vs " + b] = evalviz::Mapsswe(eval_reports[a].PerUttErrors(), eval_reports[b].PerUttErrors()).ToJson();
  };
  for (const auto &d : c.domains) {
    if (d == "SRC") {
      compare("SRC.asr", "SRC.aasr_oracle");
      compare("SRC.asr", "SRC.aasr_inv");
    } else {
      compare(d + ".asr", d + ".aasr_mlan");
      compare(d + ".asr_aug", d + ".aasr_mlan_aug");
      compare(d + ".aasr_mlan", d + ".aasr_mlan_lhuc");
    }
    compare(d + ".asr", d + ".fuse");
    compare(d + ".asr", d + ".2pass");
  }
  ws.WriteJson("reports/score.json", {{"wer", wer}, {"significance", sig}});
  ws.WriteJson("reports/score_detail.json", detail);
}

namespace stage_detail {

/// The two phones of an inventory with the largest target distance.
inline std::pair<int, int> MostDistantPair(const synth::PhoneInventory &inv) {
  std::pair<int, int> best{0, 1};
  double dist = -1.0;
  for (std::size_t a = 0; a < inv.size(); ++a)
    for (std::size_t b = a + 1; b < inv.size(); ++b) {
      const double d = synth::ArtDistance(inv.targets[a], inv.targets[b]);
      if (d > dist) {
        dist = d;
        best = {static_cast<int>(a), static_cast<int>(b)};
      }
    }
  return best;
}

struct VizPoints {
  std::vector<std::pair<std::size_t, std::size_t>> frames;  // (utterance, frame)
  std::vector<std::string> labels, ids;
};

/// Eval-split frames of the two phones, thinned by a fixed stride to at
/// most `per_phone` each.
inline VizPoints SelectFrames(const synth::Corpus &corpus, const std::string &dom, std::pair<int, int> pair,
                              std::size_t per_phone) {
  std::map<int, std::vector<std::pair<std::size_t, std::size_t>>> all;
  for (std::size_t i : Pick(corpus, dom, Split::kEval))
    for (std::size_t t = 0; t < corpus.utts[i].labels.size(); ++t) {
      const int l = corpus.utts[i].labels[t];
      if (l == pair.first || l == pair.second) all[l].push_back({i, t});
    }
  VizPoints out;
  for (int p : {pair.first, pair.second}) {
    const auto &v = all[p];
    Require(!v.empty(), StrCat("viz: phone ", p, " never occurs in ", dom, " eval"));
    const std::size_t stride = (v.size() + per_phone - 1) / per_phone;
    for (std::size_t k = 0; k < v.size(); k += stride) {
      out.frames.push_back(v[k]);
      out.labels.push_back(StrCat("p", p));
      out.ids.push_back(StrCat(corpus.utts[v[k].first].id, ":", v[k].second));
    }
  }
  return out;
}

}  // namespace stage_detail

/// viz: t-SNE of articulatory features for the most distant phone pair, with
/// 2-D silhouettes; source uses oracle features, targets compare inversion
/// with and without MLAN.
inline void StageViz(Workspace &ws) {
  const RunConfig &c = ws.config();
  synth::Corpus corpus = LoadCorpusInput(ws);
  Json rep = Json::object();
  for (const auto &d : c.domains) {
    const auto &inv = corpus.world.Inventory(corpus.world.Domain(synth::ParseDomain(d)).language);
    const auto pair = stage_detail::MostDistantPair(inv);
    const auto pts = stage_detail::SelectFrames(corpus, d, pair, c.viz.points_per_phone);
    const std::vector<std::string> sources =
        d == "SRC" ? std::vector<std::string>{"oracle"} : std::vector<std::string>{"inv_mlan", "inv_raw"};
    Json entry = {{"pair", {pair.first, pair.second}}, {"points", pts.frames.size()}};
    for (const auto &src : sources) {
      Log("viz: " + d + " " + src);
      std::map<std::size_t, Matrix> cache;
      Matrix x(pts.frames.size(), c.dct_kept * c.dct_kept);
      for (std::size_t k = 0; k < pts.frames.size(); ++k) {
        const auto [ui, t] = pts.frames[k];
        auto it = cache.find(ui);
        if (it == cache.end()) it = cache.emplace(ui, ws.ReadMatrix(AfFile(src, corpus.utts[ui].id))).first;
        std::copy(it->second.Row(t).begin(), it->second.Row(t).end(), x.Row(k).begin());
      }
      x = featex::NormStats::Compute(std::vector<const Matrix *>{&x}, d + "/viz").Apply(x);
      const auto e = evalviz::Tsne(x, pts.labels, pts.ids, c.viz.tsne, DeriveSeed(c.seed, "viz/" + d + "/" + src));
      const std::string stem = "viz/" + d + "_" + src;
      evalviz::WriteText(ws.Out(stem + ".csv"), evalviz::EmbeddingCsv(e));
      evalviz::WriteScatterSvg(e, pts.labels.front(), pts.labels.back(), ws.Out(stem + ".svg"));
      entry["silhouette"][src] = evalviz::Silhouette(e);
      entry["final_kl"][src] = e.kl.back();
    }
    rep[d] = entry;
  }
  ws.WriteJson("reports/viz.json", rep);
}

/// ablate: fusion layer sweep on the source domain with inverted features;
/// rows ranked by dev WER.
inline Json RunAblation(Workspace &ws, std::vector<std::size_t> layers) {
  const RunConfig &c = ws.config();
  std::vector<std::size_t> uniq;
  for (std::size_t k : layers) {
    if (k < 1 || k > c.tdnnf.blocks) throw ConfigError(StrCat("ablate: layer ", k, " outside 1..", c.tdnnf.blocks));
    if (std::find(uniq.begin(), uniq.end(), k) == uniq.end()) uniq.push_back(k);
  }
  Require(!uniq.empty(), "ablate: no layers given");
  synth::Corpus corpus = LoadCorpusInput(ws);
  const auto tr = AsrSet(ws, corpus, "SRC", Split::kTrain, "inv_raw");
  const auto dv = AsrSet(ws, corpus, "SRC", Split::kDev, "inv_raw");
  const auto lm = LoadLm(ws, "SRC");
  struct Row {
    std::size_t layer;
    double dev_wer;
  };
  std::vector<Row> rows;
  for (std::size_t k : uniq) {
    Log(StrCat("ablate: layer ", k));
    recognizer::TdnnfConfig mc = c.tdnnf;
    mc.num_phones = DomainPhones(corpus, "SRC");
    mc.fusion.enabled = true;
    mc.fusion.layer = k;
    mc.fusion.af_dim = c.dct_kept * c.dct_kept;
    recognizer::TdnnfRecognizer m(mc);
    recognizer::TrainTdnnf(m, tr, dv, c.train_tdnnf, DeriveSeed(c.seed, StrCat("ablate/", k)), "SRC/train");
    m.Save(ws.Out(StrCat("models/ablate/layer", k, ".ckpt")));
    rows.push_back({k, FirstBestWer(corpus, "SRC", Split::kDev, DecodeTdnnf(m, dv, lm, c.decode))});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) { return a.dev_wer < b.dev_wer; });
  Json out = Json::array();
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.push_back({{"rank", r + 1}, {"layer", rows[r].layer}, {"dev_wer", rows[r].dev_wer}});
  Json rep = {{"domain", "SRC"}, {"af", "inv_raw"}, {"rows", out}};
  ws.WriteJson("reports/ablate.json", rep);
  return rep;
}

}  // namespace a2a::cli
