// a2a/featex/uti_af.hpp

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

#include "a2a/featex/dct.hpp"
#include "a2a/synth/render.hpp"
#include "a2a/synth/utterance.hpp"

namespace a2a::featex {

/// Renders an utterance's ultrasound frames from its trajectory and speckle
/// seed and DCT-encodes them one frame at a time, so raw frames are never
/// held for the whole utterance. Matches encoding the frames SynthUtterance
/// renders from the same trajectory.
inline Matrix ArticulatoryFeatures(const synth::UtteranceRecord &u, double speckle, const DctCodec &codec) {
  RequireShape(codec.size() == synth::kFrameSize, "ArticulatoryFeatures: codec size must match frame size");
  Rng rng(u.uti_seed);
  synth::RenderConfig rc;
  rc.speckle = speckle;
  Matrix out(u.truth_art.rows(), codec.dim());
  for (std::size_t t = 0; t < u.truth_art.rows(); ++t) {
    Matrix c = codec.Encode(synth::RenderFrame(synth::ArtRow(u.truth_art, t), rng, rc));
    std::copy(c.data().begin(), c.data().end(), out.Row(t).begin());
  }
  return out;
}

}  // namespace a2a::featex
