// Copyright (c) 2026 The asgscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ASG_SYNTH_DATA_H_
#define ASG_SYNTH_DATA_H_

#include <cstdint>
#include <string>
#include <utility>

#include "asg/embedding_store.h"

namespace asg {

// Clustered embeddings that mimic speaker structure.
//
// Each speaker has a centroid drawn uniformly on the unit sphere. An
// utterance is centroid + within-speaker noise + a recording-condition offset,
// where the noise has i.i.d. N(0, within_std^2) components and the offset is condition_shift times one of
// `num_conditions` fixed unit directions, picked uniformly per utterance.
struct SynthConfig {
  int num_speakers = 40;
  int utts_per_speaker = 6;
  int dim = 32;
  double within_std = 0.25;
  double condition_shift = 0.35;
  int num_conditions = 3;
  uint64_t seed = 7;
  std::string id_prefix = "";  // prepended to speaker ids ("spk0003")

  void Validate() const;
};

// Embeddings are rounded to float32 so that they survive a save/load cycle.
// The trial list holds every unordered pair (i < j) in set order.
std::pair<EmbeddingSet, TrialList> GenerateSpeakers(const SynthConfig& config);

// All unordered pairs of `set`, labelled by speaker identity.
TrialList AllPairsTrials(const EmbeddingSet& set);

}  // namespace asg

#endif  // ASG_SYNTH_DATA_H_
