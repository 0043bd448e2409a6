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

#include "asg/eval_metrics.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace asg {
namespace {

// FAR/FRR evaluated directly at every distinct score and at +inf, then the
// crossing of the FAR and FRR segments is solved from the FRR side.
double BruteForceEer(const ScoredTrials& t) {
  std::set<double> thresholds(t.target_scores.begin(), t.target_scores.end());
  thresholds.insert(t.nontarget_scores.begin(), t.nontarget_scores.end());
  thresholds.insert(std::numeric_limits<double>::infinity());
  std::vector<std::pair<double, double>> pts;  // (far, frr)
  for (double th : thresholds) {
    double fa = 0, fr = 0;
    for (double s : t.nontarget_scores) fa += s >= th;
    for (double s : t.target_scores) fr += s < th;
    pts.emplace_back(fa / t.nontarget_scores.size(),
                     fr / t.target_scores.size());
  }
  for (size_t k = 0; k < pts.size(); ++k) {
    const double d = pts[k].first - pts[k].second;
    if (d == 0) return pts[k].first;
    if (d < 0) {
      const auto [fa0, fr0] = pts[k - 1];
      const auto [fa1, fr1] = pts[k];
      const double x = (fa0 - fr0) / ((fa0 - fr0) - (fa1 - fr1));
      return fr0 + x * (fr1 - fr0);
    }
  }
  return std::nan("");
}

ScoredTrials RandomTrials(std::mt19937_64& rng, bool quantize) {
  std::uniform_int_distribution<int> count(1, 40);
  std::normal_distribution<double> g(0, 1);
  ScoredTrials t;
  const int nt = count(rng), nn = count(rng);
  auto draw = [&](double shift) {
    double v = g(rng) + shift;
    return quantize ? std::round(v * 4) / 4 : v;
  };
  for (int i = 0; i < nt; ++i) t.target_scores.push_back(draw(1.0));
  for (int i = 0; i < nn; ++i) t.nontarget_scores.push_back(draw(0.0));
  return t;
}

TEST(EerTest, HandFixture) {
  const ScoredTrials t{{0.9, 0.8, 0.3}, {0.7, 0.2, 0.1}};
  const EerResult r = ComputeEer(t);
  EXPECT_EQ(r.eer, 1.0 / 3.0);
  EXPECT_GT(r.threshold, 0.3);
  EXPECT_LE(r.threshold, 0.7);
}

TEST(EerTest, SeparableAndIdentical) {
  EXPECT_EQ(ComputeEer({{1, 1, 1}, {0, 0}}).eer, 0.0);
  EXPECT_EQ(ComputeEer({{0.1, 0.5, 0.9}, {0.1, 0.5, 0.9}}).eer, 0.5);
  EXPECT_EQ(ComputeEer({{0.3}, {0.3}}).eer, 0.5);
}

TEST(EerTest, Errors) {
  EXPECT_THROW(ComputeEer({{0.5}, {}}), Error);
  EXPECT_THROW(ComputeEer({{}, {0.5}}), Error);
  EXPECT_THROW(ComputeEer({{std::nan("")}, {0.5}}), Error);
  EXPECT_THROW(DetPoints({}), Error);
}

TEST(EerTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 500; ++t) {
    const ScoredTrials s = RandomTrials(rng, t % 2);
    EXPECT_NEAR(ComputeEer(s).eer, BruteForceEer(s), 1e-12) << t;
  }
}

TEST(EerTest, InvariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const ScoredTrials s = RandomTrials(rng, t % 2);
    ScoredTrials m = s, neg{s.nontarget_scores, s.target_scores};
    for (double& x : m.target_scores) x = std::exp(0.5 * x) + 3.0;
    for (double& x : m.nontarget_scores) x = std::exp(0.5 * x) + 3.0;
    for (double& x : neg.target_scores) x = -x;
    for (double& x : neg.nontarget_scores) x = -x;
    const double base = ComputeEer(s).eer;
    EXPECT_NEAR(ComputeEer(m).eer, base, 1e-12);
    EXPECT_NEAR(ComputeEer(neg).eer, base, 1e-12);
  }
}

TEST(DetPointsTest, TwoScoreStaircase) {
  const auto pts = DetPoints({{1.0}, {0.0}});
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].far, 1.0);
  EXPECT_EQ(pts[0].frr, 0.0);
  EXPECT_EQ(pts[1].far, 0.0);
  EXPECT_EQ(pts[1].frr, 0.0);
  EXPECT_EQ(pts[1].threshold, 0.5);
  EXPECT_EQ(pts[2].far, 0.0);
  EXPECT_EQ(pts[2].frr, 1.0);
  EXPECT_TRUE(std::isinf(pts[0].threshold) && pts[0].threshold < 0);
}

TEST(DetPointsTest, DuplicatesCollapse) {
  const auto pts = DetPoints({{0.5, 0.5, 0.5}, {0.5, 0.2}});
  EXPECT_EQ(pts.size(), 3u);  // -inf, one midpoint, +inf
}

TEST(DetPointsTest, MonotoneAndBracketsCrossing) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto pts = DetPoints(RandomTrials(rng, t % 2));
    for (size_t k = 0; k < pts.size(); ++k) {
      EXPECT_GE(pts[k].far, 0.0);
      EXPECT_LE(pts[k].far, 1.0);
      EXPECT_GE(pts[k].frr, 0.0);
      EXPECT_LE(pts[k].frr, 1.0);
      if (k > 0) {
        EXPECT_LE(pts[k].far, pts[k - 1].far);
        EXPECT_GE(pts[k].frr, pts[k - 1].frr);
        EXPECT_GT(pts[k].threshold, pts[k - 1].threshold);
      }
    }
  }
  const auto hand = DetPoints({{0.9, 0.8, 0.3}, {0.7, 0.2, 0.1}});
  bool found = false;
  for (const auto& p : hand) {
    found |= std::abs(p.far - 1.0 / 3) < 1e-15 &&
             std::abs(p.frr - 1.0 / 3) < 1e-15;
  }
  EXPECT_TRUE(found);
}

TEST(SplitByLabelTest, Partitions) {
  const ScoredTrialList l = {{{"a", "b", true}, 0.9},
                             {{"a", "c", false}, 0.1},
                             {{"b", "c", true}, 0.4}};
  const ScoredTrials s = SplitByLabel(l);
  EXPECT_EQ(s.target_scores, (std::vector<double>{0.9, 0.4}));
  EXPECT_EQ(s.nontarget_scores, (std::vector<double>{0.1}));
}

}  // namespace
}  // namespace asg
