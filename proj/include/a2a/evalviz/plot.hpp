// a2a/evalviz/plot.hpp

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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "a2a/evalviz/tsne.hpp"

namespace a2a::evalviz {

inline std::string FormatFixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// "x,y,label,utt_id" with a header row.
inline std::string EmbeddingCsv(const Embedding2D &e) {
  std::ostringstream os;
  os << "x,y,label,utt_id\n";
  for (const auto &p : e.points) os << FormatFixed(p.x, 6) << ',' << FormatFixed(p.y, 6) << ',' << p.label << ',' << p.utt_id << '\n';
  return os.str();
}

inline void WriteText(const std::filesystem::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
  if (!os) throw Error("failed writing " + path.string());
}

/// Scatter of the points carrying `first` (red) or `second` (green), with a
/// legend and no axes.
inline std::string ScatterSvg(const Embedding2D &e, const std::string &first, const std::string &second) {
  Require(first != second, "scatter: the two labels must differ");
  std::vector<const EmbeddedPoint *> sel;
  for (const auto &p : e.points)
    if (p.label == first || p.label == second) sel.push_back(&p);
  Require(!sel.empty(), "scatter: no points carry the selected labels");
  double x0 = sel[0]->x, x1 = x0, y0 = sel[0]->y, y1 = y0;
  for (const auto *p : sel) {
    x0 = std::min(x0, p->x);
    x1 = std::max(x1, p->x);
    y0 = std::min(y0, p->y);
    y1 = std::max(y1, p->y);
  }
  const double size = 400.0, margin = 20.0;
  const double sx = x1 > x0 ? (size - 2 * margin) / (x1 - x0) : 0.0;
  const double sy = y1 > y0 ? (size - 2 * margin) / (y1 - y0) : 0.0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"440\" viewBox=\"0 0 400 440\">\n";
  os << "<rect width=\"400\" height=\"440\" fill=\"white\"/>\n";
  for (const auto *p : sel) {
    const double cx = x1 > x0 ? margin + (p->x - x0) * sx : size / 2;
    const double cy = y1 > y0 ? margin + (y1 - p->y) * sy : size / 2;
    os << "<circle cx=\"" << FormatFixed(cx, 2) << "\" cy=\"" << FormatFixed(cy, 2) << "\" r=\"3\" fill=\""
       << (p->label == first ? "red" : "green") << "\" fill-opacity=\"0.7\"/>\n";
  }
  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"20\" y=\"414\" width=\"10\" height=\"10\" fill=\"red\"/><text x=\"34\" y=\"423\">" << first << "</text>\n";
  os << "<rect x=\"120\" y=\"414\" width=\"10\" height=\"10\" fill=\"green\"/><text x=\"134\" y=\"423\">" << second
     << "</text>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

/// Builds the SVG first so a bad selection leaves no file behind.
inline void WriteScatterSvg(const Embedding2D &e, const std::string &first, const std::string &second,
                            const std::filesystem::path &path) {
  WriteText(path, ScatterSvg(e, first, second));
}

}  // namespace a2a::evalviz
