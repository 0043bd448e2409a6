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

#include <gtest/gtest.h>

#include <cmath>

#include "asg/edge_scorer.h"
#include "asg/eval_metrics.h"

namespace asg {
namespace {

double RawEer(const EmbeddingSet& set, const TrialList& trials) {
  ScoredTrialList scored;
  for (const auto& t : trials) {
    scored.push_back(
        {t, VertexScore(set.Find(t.enroll).vector, set.Find(t.test).vector)});
  }
  return ComputeEer(SplitByLabel(scored)).eer;
}

TEST(SynthDataTest, DeterministicFromSeed) {
  SynthConfig c;
  c.num_speakers = 5;
  c.utts_per_speaker = 3;
  const auto [a, ta] = GenerateSpeakers(c);
  const auto [b, tb] = GenerateSpeakers(c);
  ASSERT_EQ(a.size(), 15u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].vector, b[i].vector);
  }
  c.seed = 8;
  const auto [d, td] = GenerateSpeakers(c);
  EXPECT_NE(a[0].vector, d[0].vector);
}

TEST(SynthDataTest, IdsAndLabels) {
  SynthConfig c;
  c.num_speakers = 4;
  c.utts_per_speaker = 3;
  c.id_prefix = "dev";
  const auto [set, trials] = GenerateSpeakers(c);
  EXPECT_EQ(set[0].id, "devspk0000-utt000");
  EXPECT_EQ(set[0].speaker, "devspk0000");
  EXPECT_EQ(set.speakers().size(), 4u);
  ASSERT_EQ(trials.size(), 12u * 11u / 2u);
  int targets = 0;
  for (const auto& t : trials) {
    EXPECT_EQ(t.target, set.Find(t.enroll).speaker == set.Find(t.test).speaker);
    targets += t.target;
  }
  EXPECT_EQ(targets, 4 * 3);
}

TEST(SynthDataTest, ValuesSurviveFloatRoundTrip) {
  const auto [set, trials] = GenerateSpeakers(SynthConfig{});
  for (const auto& e : set.entries()) {
    EXPECT_EQ(e.vector, e.vector.cast<float>().cast<double>());
  }
}

TEST(SynthDataTest, NoiselessClustersAreSeparable) {
  SynthConfig c;
  c.within_std = 0.0;
  c.condition_shift = 0.0;
  const auto [set, trials] = GenerateSpeakers(c);
  for (const auto& spk : set.speakers()) {
    const auto& pos = set.PositionsOf(spk);
    for (size_t p : pos) EXPECT_EQ(set[p].vector, set[pos[0]].vector);
  }
  EXPECT_EQ(RawEer(set, trials), 0.0);
}

TEST(SynthDataTest, SingleUtteranceSpeakersHaveNoTargets) {
  SynthConfig c;
  c.num_speakers = 2;
  c.utts_per_speaker = 1;
  const auto [set, trials] = GenerateSpeakers(c);
  ASSERT_EQ(trials.size(), 1u);
  EXPECT_FALSE(trials[0].target);
  EXPECT_THROW(RawEer(set, trials), Error);
}

TEST(SynthDataTest, WithinSpeakerSpreadMatchesConfig) {
  SynthConfig c;
  c.num_speakers = 2;
  c.utts_per_speaker = 600;
  c.dim = 8;
  c.within_std = 0.3;
  c.condition_shift = 0.0;
  const auto [set, trials] = GenerateSpeakers(c);
  for (const auto& spk : set.speakers()) {
    const auto& pos = set.PositionsOf(spk);
    Vec mean = Vec::Zero(8);
    for (size_t p : pos) mean += set[p].vector;
    mean /= pos.size();
    EXPECT_NEAR(mean.norm(), 1.0, 0.06);  // centroid on the unit sphere
    Vec var = Vec::Zero(8);
    for (size_t p : pos) var += (set[p].vector - mean).cwiseAbs2();
    var /= pos.size() - 1;
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(std::sqrt(var[k]), 0.3, 0.03);
  }
}

TEST(SynthDataTest, ConditionOffsetsComeFromSmallPool) {
  SynthConfig c;
  c.num_speakers = 1;
  c.utts_per_speaker = 60;
  c.within_std = 0.0;
  c.condition_shift = 0.5;
  c.num_conditions = 3;
  const auto [set, trials] = GenerateSpeakers(c);
  std::vector<Vec> distinct;
  for (const auto& e : set.entries()) {
    bool seen = false;
    for (const auto& d : distinct) seen |= (d - e.vector).norm() < 1e-6;
    if (!seen) distinct.push_back(e.vector);
  }
  EXPECT_EQ(distinct.size(), 3u);
  for (size_t i = 0; i < distinct.size(); ++i) {
    for (size_t j = i + 1; j < distinct.size(); ++j) {
      EXPECT_LE((distinct[i] - distinct[j]).norm(), 1.0 + 1e-6);
    }
  }
}

TEST(SynthDataTest, PinnedFixtureIsNotSeparable) {
  const auto [set, trials] = GenerateSpeakers(SynthConfig{});
  EXPECT_EQ(set.size(), 240u);
  EXPECT_EQ(trials.size(), 28680u);
  EXPECT_GT(RawEer(set, trials), 0.0);
}

TEST(SynthDataTest, InvalidConfig) {
  SynthConfig c;
  c.num_speakers = 0;
  EXPECT_THROW(GenerateSpeakers(c), Error);
  c = SynthConfig{};
  c.within_std = -1;
  EXPECT_THROW(GenerateSpeakers(c), Error);
  c = SynthConfig{};
  c.num_conditions = 0;
  EXPECT_THROW(GenerateSpeakers(c), Error);
}

TEST(SynthDataTest, AllPairsOfExistingSet) {
  EmbeddingSet set(1);
  set.Add({"a", "x", Vec::Ones(1)});
  set.Add({"b", "y", Vec::Ones(1)});
  set.Add({"c", "x", Vec::Ones(1)});
  const TrialList t = AllPairsTrials(set);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[1].enroll, "a");
  EXPECT_EQ(t[1].test, "c");
  EXPECT_TRUE(t[1].target);
}

}  // namespace
}  // namespace asg
