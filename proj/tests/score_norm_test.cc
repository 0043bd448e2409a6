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

#include "asg/score_norm.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "asg/edge_scorer.h"
#include "asg/eval_metrics.h"
#include "asg/synth_data.h"
#include "test_util.h"

namespace asg {
namespace {

using testing::RandomVec;
using testing::RandomVecs;

Vec V(std::initializer_list<double> values) {
  Vec v(values.size());
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

double Cos(const Vec& a, const Vec& b) {
  return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

// Two-pass mean and population deviation.
CohortStats StatsOracle(std::vector<double> s, int top = 0) {
  if (top > 0) {
    std::sort(s.rbegin(), s.rend());
    s.resize(std::min<size_t>(top, s.size()));
  }
  double mu = 0.0;
  for (double x : s) mu += x;
  mu /= s.size();
  double var = 0.0;
  for (double x : s) var += (x - mu) * (x - mu);
  return {mu, std::sqrt(var / s.size())};
}

TEST(CohortStatsTest, HandExamples) {
  const CohortStats two = StatsFromScores({0.0, 1.0});
  EXPECT_EQ(two.mu, 0.5);
  EXPECT_EQ(two.sigma, 0.5);
  const CohortStats three = StatsFromScores({0.2, 0.4, 0.6});
  EXPECT_NEAR(three.mu, 0.4, 1e-15);
  EXPECT_NEAR(three.sigma, 0.1632993, 1e-7);
  EXPECT_NEAR(three.sigma, std::sqrt(0.08 / 3.0), 1e-15);
}

TEST(CohortStatsTest, DegenerateCohorts) {
  EXPECT_THROW(StatsFromScores({0.3, 0.3, 0.3}), Error);
  EXPECT_THROW(StatsFromScores({0.3}), Error);
  const Vec e = V({1, 2, 3});
  EXPECT_THROW(ComputeCohortStats(e, {V({1, 1, 0}), V({2, 2, 0})}), Error);
  EXPECT_THROW(ComputeCohortStats(e, {V({1, 1, 0})}), Error);
}

TEST(CohortStatsTest, MatchesOracleWithAndWithoutTopN) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(3 + t);
    for (double& x : s) x = u(rng);
    const CohortStats all = StatsFromScores(s);
    const CohortStats ref = StatsOracle(s);
    EXPECT_NEAR(all.mu, ref.mu, 1e-14);
    EXPECT_NEAR(all.sigma, ref.sigma, 1e-14);
    const int top = 2 + t % 5;
    const CohortStats adaptive = StatsFromScores(s, TopK::Of(top));
    const CohortStats aref = StatsOracle(s, top);
    EXPECT_NEAR(adaptive.mu, aref.mu, 1e-14);
    EXPECT_NEAR(adaptive.sigma, aref.sigma, 1e-14);
  }
}

TEST(CohortStatsTest, DefaultScorerIsCosine) {
  std::mt19937_64 rng(2);
  const Vec e = RandomVec(6, rng);
  const auto cohort = RandomVecs(9, 6, rng);
  std::vector<double> s;
  for (const auto& c : cohort) s.push_back(Cos(e, c));
  const CohortStats got = ComputeCohortStats(e, cohort);
  EXPECT_NEAR(got.mu, StatsOracle(s).mu, 1e-15);
  const CohortStats dot = ComputeCohortStats(
      e, cohort, [](const Vec& a, const Vec& b) { return a.dot(b); });
  std::vector<double> d;
  for (const auto& c : cohort) d.push_back(e.dot(c));
  EXPECT_NEAR(dot.sigma, StatsOracle(d).sigma, 1e-14);
}

TEST(NormalizeTest, HandExamples) {
  const CohortStats e{0.5, 0.5}, t{0.0, 1.0};
  EXPECT_EQ(Normalize(0.5, NormMethod::Z(), e, std::nullopt), 0.0);
  EXPECT_EQ(Normalize(1.0, NormMethod::Z(), e, std::nullopt), 1.0);
  EXPECT_EQ(Normalize(1.0, NormMethod::S(), e, t), 1.0);
  EXPECT_EQ(Normalize(0.25, NormMethod::T(), std::nullopt, t), 0.25);
  EXPECT_EQ(Normalize(1.0, NormMethod::ZT(), e, CohortStats{0.5, 2.0}), 0.25);
}

TEST(NormalizeTest, MissingSideIsError) {
  const CohortStats s{0.0, 1.0};
  EXPECT_THROW(Normalize(1, NormMethod::Z(), std::nullopt, s), Error);
  EXPECT_THROW(Normalize(1, NormMethod::T(), s, std::nullopt), Error);
  EXPECT_THROW(Normalize(1, NormMethod::S(), s, std::nullopt), Error);
  EXPECT_THROW(Normalize(1, NormMethod::ZT(), std::nullopt, s), Error);
}

TEST(NormalizeTest, MonotoneAndSymmetric) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1), pos(0.05, 2);
  for (int t = 0; t < 200; ++t) {
    const CohortStats e{u(rng), pos(rng)}, s{u(rng), pos(rng)};
    const double a = u(rng), b = a + pos(rng);
    for (const NormMethod& m :
         {NormMethod::Z(), NormMethod::T(), NormMethod::ZT(), NormMethod::S()}) {
      EXPECT_LT(Normalize(a, m, e, s), Normalize(b, m, e, s));
    }
    EXPECT_NEAR(Normalize(a, NormMethod::S(), e, s),
                Normalize(a, NormMethod::S(), s, e), 1e-15);
    EXPECT_EQ(Normalize(e.mu, NormMethod::Z(), e, std::nullopt), 0.0);
    EXPECT_NEAR(Normalize(e.mu + e.sigma, NormMethod::Z(), e, std::nullopt),
                1.0, 1e-15);
  }
}

TEST(NormalizeTest, ParseAndPrint) {
  EXPECT_EQ(ParseNormMethod("zt").kind, NormKind::kZT);
  EXPECT_EQ(ParseNormMethod("s", TopK::Of(20)).adaptive_top, TopK::Of(20));
  EXPECT_EQ(ToString(NormMethod::S(TopK::Of(20))), "s(top=20)");
  EXPECT_EQ(ToString(NormMethod::T()), "t");
  EXPECT_THROW(ParseNormMethod("as"), Error);
}

TEST(CohortNormalizerTest, ZtUsesMemberNormalizedCohortScores) {
  std::mt19937_64 rng(13);
  const auto cohort = RandomVecs(7, 5, rng);
  const Vec enroll = RandomVec(5, rng), test = RandomVec(5, rng);
  const CohortNormalizer n(cohort, NormMethod::ZT());

  std::vector<double> es;
  for (const auto& c : cohort) es.push_back(Cos(enroll, c));
  const CohortStats e = StatsOracle(es);
  std::vector<double> zs;
  for (size_t k = 0; k < cohort.size(); ++k) {
    std::vector<double> rest;
    for (size_t l = 0; l < cohort.size(); ++l) {
      if (l != k) rest.push_back(Cos(cohort[k], cohort[l]));
    }
    const CohortStats member = StatsOracle(rest);
    zs.push_back((Cos(test, cohort[k]) - member.mu) / member.sigma);
  }
  const CohortStats t = StatsOracle(zs);
  const double raw = Cos(enroll, test);
  const double expected = ((raw - e.mu) / e.sigma - t.mu) / t.sigma;
  EXPECT_NEAR(n.Apply(raw, n.Stats(enroll), n.Stats(test)), expected, 1e-12);
  EXPECT_THROW(CohortNormalizer(RandomVecs(2, 5, rng), NormMethod::ZT()),
               Error);
}

TEST(NormalizeTrialsTest, MatchesPerTrialComputationInAnyOrder) {
  SynthConfig sc;
  sc.num_speakers = 6;
  sc.utts_per_speaker = 3;
  sc.dim = 8;
  auto [set, trials] = GenerateSpeakers(sc);
  sc.seed = 99;
  sc.id_prefix = "coh";
  const EmbeddingSet cohort = GenerateSpeakers(sc).first;
  const auto cv = cohort.Vectors();
  for (const NormMethod& m : {NormMethod::Z(), NormMethod::T(),
                              NormMethod::ZT(), NormMethod::S(TopK::Of(5))}) {
    const ScoredTrialList out = NormalizeTrials(trials, set, cohort, m);
    ASSERT_EQ(out.size(), trials.size());
    const CohortNormalizer n(cv, m);
    for (size_t i = 0; i < trials.size(); ++i) {
      const Vec& a = set.Find(trials[i].enroll).vector;
      const Vec& b = set.Find(trials[i].test).vector;
      EXPECT_EQ(out[i].score,
                n.Apply(VertexScore(a, b), n.Stats(a), n.Stats(b)));
    }
    TrialList reversed(trials.rbegin(), trials.rend());
    const ScoredTrialList rev = NormalizeTrials(reversed, set, cohort, m);
    for (size_t i = 0; i < trials.size(); ++i) {
      EXPECT_EQ(rev[trials.size() - 1 - i].score, out[i].score);
    }
  }
  EXPECT_TRUE(NormalizeTrials({}, set, cohort, NormMethod::S()).empty());
  EXPECT_THROW(
      NormalizeTrials({{"nope", trials[0].test, false}}, set, cohort,
                      NormMethod::Z()),
      Error);
}

TEST(NormalizeTrialsTest, CommonEnrollStatsPreserveEer) {
  // Every enroll vector sits at the same angle pattern to the cohort, so
  // z-norm applies one affine map to all scores.
  EmbeddingSet set(3);
  EmbeddingSet cohort(3);
  cohort.Add({"c1", "c1", V({0, 0, 1})});
  cohort.Add({"c2", "c2", V({0, 0, -1})});
  cohort.Add({"c3", "c3", V({0, 0, 0.5})});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0, 6.283185307179586);
  for (int i = 0; i < 30; ++i) {
    const double a = ang(rng);
    set.Add({"u" + std::to_string(i), "s" + std::to_string(i % 5),
             V({std::cos(a), std::sin(a), 0.3})});
  }
  TrialList trials;
  for (size_t i = 0; i < set.size(); ++i) {
    for (size_t j = i + 1; j < set.size(); ++j) {
      trials.push_back({set[i].id, set[j].id, set[i].speaker == set[j].speaker});
    }
  }
  ScoredTrialList raw;
  for (const auto& t : trials) {
    raw.push_back({t, Cos(set.Find(t.enroll).vector, set.Find(t.test).vector)});
  }
  const ScoredTrialList z = NormalizeTrials(trials, set, cohort, NormMethod::Z());
  EXPECT_NEAR(ComputeEer(SplitByLabel(z)).eer,
              ComputeEer(SplitByLabel(raw)).eer, 1e-12);
}

TEST(NormalizeTrialsTest, OwnClusterCohortSeparatesTargets) {
  SynthConfig sc;
  sc.num_speakers = 2;
  sc.utts_per_speaker = 12;
  sc.dim = 16;
  sc.within_std = 0.05;
  sc.condition_shift = 0.0;
  auto [set, trials] = GenerateSpeakers(sc);
  // Cohort = the first speaker's utterances; enroll ids come from it.
  EmbeddingSet cohort(16);
  for (size_t p : set.PositionsOf(set.speakers()[0])) {
    Embedding e = set[p];
    e.id = "coh-" + e.id;
    cohort.Add(std::move(e));
  }
  TrialList own;
  for (const auto& t : trials) {
    if (set.Find(t.enroll).speaker == set.speakers()[0]) own.push_back(t);
  }
  const ScoredTrialList out =
      NormalizeTrials(own, set, cohort, NormMethod::S());
  const ScoredTrials split = SplitByLabel(out);
  ASSERT_FALSE(split.target_scores.empty());
  ASSERT_FALSE(split.nontarget_scores.empty());
  EXPECT_GT(*std::min_element(split.target_scores.begin(),
                              split.target_scores.end()),
            *std::max_element(split.nontarget_scores.begin(),
                              split.nontarget_scores.end()));
}

}  // namespace
}  // namespace asg
