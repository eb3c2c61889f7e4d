// a2a/synth/corpus.hpp

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
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "a2a/numcore/config.hpp"
#include "a2a/numcore/parallel.hpp"
#include "a2a/synth/fseq.hpp"
#include "a2a/synth/utterance.hpp"

namespace a2a::synth {

enum class Split { kTrain, kDev, kEval };

inline std::string SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kEval: return "eval";
  }
  return "?";
}

inline Split ParseSplit(const std::string &s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "eval") return Split::kEval;
  throw Error("unknown split " + s);
}

inline Json ToJson(const CorpusConfig &c) {
  return {{"speakers_per_domain", c.speakers_per_domain},
          {"utts_per_speaker", c.utts_per_speaker},
          {"train_frac", c.train_frac},
          {"dev_frac", c.dev_frac},
          {"src_noise", c.src_noise},
          {"tgt_a_noise", c.tgt_a_noise},
          {"tgt_b_noise", c.tgt_b_noise},
          {"tgt_a_rate", c.tgt_a_rate},
          {"tgt_b_rate", c.tgt_b_rate},
          {"channel_norm", c.channel_norm},
          {"offset_scale", c.offset_scale},
          {"speaker_gain_sd", c.speaker_gain_sd},
          {"traj_noise", c.traj_noise},
          {"speckle", c.speckle},
          {"mix_column_scale", c.mix_column_scale},
          {"min_phones", c.min_phones},
          {"max_phones", c.max_phones},
          {"min_dur", c.min_dur},
          {"max_dur", c.max_dur}};
}

inline CorpusConfig CorpusConfigFromJson(const Json &j) {
  CorpusConfig c;
  ConfigReader r(j, "corpus");
  r.Get("speakers_per_domain", c.speakers_per_domain)
      .Get("utts_per_speaker", c.utts_per_speaker)
      .Get("train_frac", c.train_frac)
      .Get("dev_frac", c.dev_frac)
      .Get("src_noise", c.src_noise)
      .Get("tgt_a_noise", c.tgt_a_noise)
      .Get("tgt_b_noise", c.tgt_b_noise)
      .Get("tgt_a_rate", c.tgt_a_rate)
      .Get("tgt_b_rate", c.tgt_b_rate)
      .Get("channel_norm", c.channel_norm)
      .Get("offset_scale", c.offset_scale)
      .Get("speaker_gain_sd", c.speaker_gain_sd)
      .Get("traj_noise", c.traj_noise)
      .Get("speckle", c.speckle)
      .Get("mix_column_scale", c.mix_column_scale)
      .Get("min_phones", c.min_phones)
      .Get("max_phones", c.max_phones)
      .Get("min_dur", c.min_dur)
      .Get("max_dur", c.max_dur);
  r.Finish();
  if (c.speakers_per_domain < 3) throw ConfigError("corpus.speakers_per_domain must be >= 3");
  if (c.utts_per_speaker < 1) throw ConfigError("corpus.utts_per_speaker must be >= 1");
  if (c.train_frac <= 0 || c.dev_frac <= 0 || c.train_frac + c.dev_frac >= 1.0)
    throw ConfigError("corpus split fractions must be positive and leave room for eval");
  return c;
}

struct ManifestEntry {
  std::string id;
  std::string speaker;
  DomainId domain = DomainId::kSrc;
  Split split = Split::kTrain;
  std::size_t n_frames = 0;
  std::uint64_t uti_seed = 0;
  std::map<std::string, std::string> paths;  // relative to the manifest directory
};

/// Declarative index of a generated corpus.
struct CorpusManifest {
  std::uint64_t seed = 0;
  CorpusConfig config;
  Json domains = Json::array();
  std::vector<ManifestEntry> entries;

  Json ToJson() const {
    Json utts = Json::array();
    for (const auto &e : entries)
      utts.push_back({{"id", e.id},
                      {"speaker", e.speaker},
                      {"domain", DomainName(e.domain)},
                      {"split", SplitName(e.split)},
                      {"n_frames", e.n_frames},
                      {"uti_seed", e.uti_seed},
                      {"paths", e.paths}});
    return {{"corpus_seed", seed}, {"config", synth::ToJson(config)}, {"domains", domains}, {"utterances", utts}};
  }

  static CorpusManifest FromJson(const Json &j) {
    CorpusManifest m;
    m.seed = j.at("corpus_seed").get<std::uint64_t>();
    m.config = CorpusConfigFromJson(j.at("config"));
    m.domains = j.at("domains");
    for (const auto &u : j.at("utterances")) {
      ManifestEntry e;
      e.id = u.at("id").get<std::string>();
      e.speaker = u.at("speaker").get<std::string>();
      e.domain = ParseDomain(u.at("domain").get<std::string>());
      e.split = ParseSplit(u.at("split").get<std::string>());
      e.n_frames = u.at("n_frames").get<std::size_t>();
      e.uti_seed = u.at("uti_seed").get<std::uint64_t>();
      e.paths = u.at("paths").get<std::map<std::string, std::string>>();
      m.entries.push_back(std::move(e));
    }
    return m;
  }
};

inline Json DomainJson(const DomainSpec &d) {
  return {{"id", DomainName(d.id)},
          {"language", LanguageName(d.language)},
          {"rate", d.rate},
          {"noise", d.noise},
          {"has_ultrasound", d.has_ultrasound},
          {"channel", d.channel.data()},
          {"offset", d.offset.data()}};
}

/// In-memory corpus: the world it came from plus every utterance, in
/// manifest order (domain, speaker, index).
struct Corpus {
  SynthWorld world;
  std::vector<UtteranceRecord> utts;
  std::vector<Split> splits;

  std::vector<std::size_t> Select(DomainId d, Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < utts.size(); ++i)
      if (utts[i].domain == d && splits[i] == s) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> Select(DomainId d) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < utts.size(); ++i)
      if (utts[i].domain == d) out.push_back(i);
    return out;
  }
};

/// Speaker index within its domain -> split. The first round(train_frac*S)
/// speakers train, the next round(dev_frac*S) are dev, the rest eval.
inline Split SpeakerSplit(const CorpusConfig &c, std::size_t speaker_index) {
  const auto S = static_cast<double>(c.speakers_per_domain);
  const auto n_train = static_cast<std::size_t>(std::max(1.0, std::round(c.train_frac * S)));
  const auto n_dev = static_cast<std::size_t>(std::max(1.0, std::round(c.dev_frac * S)));
  if (speaker_index < n_train) return Split::kTrain;
  if (speaker_index < n_train + n_dev) return Split::kDev;
  return Split::kEval;
}

inline std::string UtteranceId(const std::string &speaker, std::size_t index) {
  std::string n = std::to_string(index);
  while (n.size() < 3) n = "0" + n;
  return speaker + "_u" + n;
}

/// Generates every utterance. Each one is seeded by DeriveSeed(seed,
/// "utt/<id>") so generation order and worker count do not matter.
/// fbk and truth_art are rounded through f32 so memory matches disk.
inline Corpus GenerateCorpus(const CorpusConfig &cfg, std::uint64_t seed, const SynthOptions &opt = {false}) {
  Corpus c;
  c.world = SynthWorld::Build(seed, cfg);
  struct Job {
    std::size_t domain, speaker_global, speaker_local, index;
  };
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < c.world.domains.size(); ++d)
    for (std::size_t s = 0; s < cfg.speakers_per_domain; ++s)
      for (std::size_t u = 0; u < cfg.utts_per_speaker; ++u)
        jobs.push_back({d, d * cfg.speakers_per_domain + s, s, u});
  c.utts.resize(jobs.size());
  c.splits.resize(jobs.size());
  ParallelFor(jobs.size(), [&](std::size_t i) {
    const Job &j = jobs[i];
    const Speaker &spk = c.world.speakers[j.speaker_global];
    const std::string id = UtteranceId(spk.id, j.index);
    Rng rng(DeriveSeed(seed, "utt/" + id));
    UtteranceRecord u = SynthUtterance(c.world, c.world.domains[j.domain], spk, rng, opt);
    u.id = id;
    u.fbk = QuantizeF32(std::move(u.fbk));
    u.truth_art = QuantizeF32(std::move(u.truth_art));
    c.utts[i] = std::move(u);
    c.splits[i] = SpeakerSplit(cfg, j.speaker_local);
  });
  return c;
}

/// Writes manifest.json plus per-utterance fbk, label and hidden trajectory
/// files under `dir`.
inline CorpusManifest WriteCorpus(const Corpus &c, const std::filesystem::path &dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "feats", ec);
  if (ec) throw Error("cannot create " + (dir / "feats").string() + ": " + ec.message());
  CorpusManifest m;
  m.seed = c.world.seed;
  m.config = c.world.config;
  for (const auto &d : c.world.domains) m.domains.push_back(DomainJson(d));
  for (std::size_t i = 0; i < c.utts.size(); ++i) {
    const auto &u = c.utts[i];
    ManifestEntry e;
    e.id = u.id;
    e.speaker = u.speaker;
    e.domain = u.domain;
    e.split = c.splits[i];
    e.n_frames = u.num_frames();
    e.uti_seed = u.uti_seed;
    e.paths = {{"fbk", "feats/" + u.id + ".fbk"}, {"labels", "feats/" + u.id + ".lab"},
               {"truth_art", "feats/" + u.id + ".art"}};
    WriteFeatures(dir / e.paths["fbk"], u.fbk);
    WriteLabels(dir / e.paths["labels"], u.labels);
    WriteFeatures(dir / e.paths["truth_art"], u.truth_art);
    m.entries.push_back(std::move(e));
  }
  std::ofstream os(dir / "manifest.json");
  if (!os) throw Error("cannot write manifest in " + dir.string());
  os << m.ToJson().dump(1) << "\n";
  return m;
}

/// Rebuilds the in-memory corpus from a manifest directory. The world is
/// re-derived from the stored seed and config; per-utterance data is read
/// from disk. Phone sequences are recovered from the frame labels.
inline Corpus LoadCorpus(const std::filesystem::path &dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw Error("cannot open " + (dir / "manifest.json").string());
  CorpusManifest m = CorpusManifest::FromJson(Json::parse(is));
  Corpus c;
  c.world = SynthWorld::Build(m.seed, m.config);
  c.utts.resize(m.entries.size());
  c.splits.resize(m.entries.size());
  ParallelFor(m.entries.size(), [&](std::size_t i) {
    const auto &e = m.entries[i];
    UtteranceRecord u;
    u.id = e.id;
    u.speaker = e.speaker;
    u.domain = e.domain;
    u.language = c.world.Domain(e.domain).language;
    u.fbk = ReadFeatures(dir / e.paths.at("fbk"));
    u.labels = ReadLabels(dir / e.paths.at("labels"));
    u.truth_art = ReadFeatures(dir / e.paths.at("truth_art"));
    u.uti_seed = e.uti_seed;
    RequireShape(u.fbk.rows() == e.n_frames && u.labels.size() == e.n_frames && u.truth_art.rows() == e.n_frames,
                 "LoadCorpus: frame count mismatch for " + e.id);
    // labels never repeat a phone across a boundary, so runs give the phone sequence
    for (std::size_t t = 0; t < u.labels.size(); ++t)
      if (t == 0 || u.labels[t] != u.labels[t - 1]) u.phones.push_back(u.labels[t]);
    c.utts[i] = std::move(u);
    c.splits[i] = e.split;
  });
  return c;
}

}  // namespace a2a::synth
