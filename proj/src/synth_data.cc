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

#include "asg/synth_data.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

namespace asg {

namespace {

Vec RandomUnit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(dim);
  do {
    for (int k = 0; k < dim; ++k) v[k] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

std::string Numbered(const std::string& prefix, int n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, n);
  return prefix + buf;
}

}  // namespace

void SynthConfig::Validate() const {
  if (num_speakers < 1 || utts_per_speaker < 1 || dim < 1) {
    throw Error("synthetic config: counts and dim must be positive");
  }
  if (!(within_std >= 0.0) || !(condition_shift >= 0.0)) {
    throw Error("synthetic config: spreads must be non-negative");
  }
  if (num_conditions < 1) {
    throw Error("synthetic config: need at least one condition");
  }
}

std::pair<EmbeddingSet, TrialList> GenerateSpeakers(const SynthConfig& config) {
  config.Validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, config.within_std);
  std::uniform_int_distribution<int> pick(0, config.num_conditions - 1);

  std::vector<Vec> conditions;
  for (int c = 0; c < config.num_conditions; ++c) {
    conditions.push_back(RandomUnit(config.dim, rng));
  }

  EmbeddingSet set(config.dim);
  for (int s = 0; s < config.num_speakers; ++s) {
    const Vec centroid = RandomUnit(config.dim, rng);
    const std::string speaker = Numbered(config.id_prefix + "spk", s, 4);
    for (int u = 0; u < config.utts_per_speaker; ++u) {
      Vec v = centroid;
      for (int k = 0; k < config.dim; ++k) v[k] += noise(rng);
      v += config.condition_shift * conditions[pick(rng)];
      Embedding e;
      e.id = Numbered(speaker + "-utt", u, 3);
      e.speaker = speaker;
      e.vector = v.cast<float>().cast<double>();
      set.Add(std::move(e));
    }
  }
  TrialList trials = AllPairsTrials(set);
  return {std::move(set), std::move(trials)};
}

TrialList AllPairsTrials(const EmbeddingSet& set) {
  TrialList trials;
  for (size_t i = 0; i < set.size(); ++i) {
    for (size_t j = i + 1; j < set.size(); ++j) {
      trials.push_back(
          {set[i].id, set[j].id, set[i].speaker == set[j].speaker});
    }
  }
  return trials;
}

}  // namespace asg
