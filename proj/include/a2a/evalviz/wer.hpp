// a2a/evalviz/wer.hpp

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

#include <map>
#include <string>
#include <vector>

#include "a2a/numcore/common.hpp"
#include "a2a/numcore/layer.hpp"

namespace a2a::evalviz {

struct EditCounts {
  std::size_t sub = 0, del = 0, ins = 0, ref_len = 0;

  std::size_t errors() const { return sub + del + ins; }
  /// False when the reference is empty and the rate is undefined.
  bool defined() const { return ref_len > 0; }
  double Wer() const { return defined() ? 100.0 * static_cast<double>(errors()) / static_cast<double>(ref_len) : 0.0; }

  EditCounts &operator+=(const EditCounts &o) {
    sub += o.sub;
    del += o.del;
    ins += o.ins;
    ref_len += o.ref_len;
    return *this;
  }
  Json ToJson() const {
    Json j{{"sub", sub}, {"del", del}, {"ins", ins}, {"n_ref", ref_len}, {"errors", errors()}};
    if (defined()) j["wer"] = Wer();
    else j["wer_undefined"] = true;
    return j;
  }
};

/// Unit-cost Levenshtein alignment. Among equal-cost alignments the
/// backtrace prefers substitution (or match), then deletion, then insertion.
inline EditCounts Align(const std::vector<int> &ref, const std::vector<int> &hyp) {
  const std::size_t R = ref.size(), H = hyp.size();
  std::vector<std::size_t> d((R + 1) * (H + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t & { return d[i * (H + 1) + j]; };
  for (std::size_t i = 0; i <= R; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= H; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= R; ++i)
    for (std::size_t j = 1; j <= H; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1]), at(i - 1, j) + 1, at(i, j - 1) + 1});
  EditCounts c;
  c.ref_len = R;
  std::size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1])) {
      c.sub += ref[i - 1] != hyp[j - 1];
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.del;
      --i;
    } else {
      ++c.ins;
      --j;
    }
  }
  return c;
}

struct UttScore {
  std::string id, speaker, domain;
  EditCounts counts;
};

/// Per-utterance counts with corpus totals and speaker/domain subtotals.
struct ScoreReport {
  std::vector<UttScore> utts;
  EditCounts total;
  std::map<std::string, EditCounts> by_speaker, by_domain;

  void Add(UttScore u) {
    total += u.counts;
    by_speaker[u.speaker] += u.counts;
    by_domain[u.domain] += u.counts;
    utts.push_back(std::move(u));
  }
  double Wer() const { return total.Wer(); }
  std::vector<double> PerUttErrors() const {
    std::vector<double> e;
    for (const auto &u : utts) e.push_back(static_cast<double>(u.counts.errors()));
    return e;
  }

  Json ToJson() const {
    Json j;
    j["total"] = total.ToJson();
    for (const auto &[k, v] : by_speaker) j["by_speaker"][k] = v.ToJson();
    for (const auto &[k, v] : by_domain) j["by_domain"][k] = v.ToJson();
    Json arr = Json::array();
    for (const auto &u : utts) {
      Json e = u.counts.ToJson();
      e["id"] = u.id;
      e["speaker"] = u.speaker;
      e["domain"] = u.domain;
      arr.push_back(e);
    }
    j["utterances"] = arr;
    return j;
  }
};

}  // namespace a2a::evalviz
