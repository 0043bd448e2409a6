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

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "asg/edge_scorer.h"

namespace asg {

NormMethod ParseNormMethod(const std::string& name, TopK snorm_top) {
  if (name == "z") return NormMethod::Z();
  if (name == "t") return NormMethod::T();
  if (name == "zt") return NormMethod::ZT();
  if (name == "s") return NormMethod::S(snorm_top);
  throw Error("unknown normalization '" + name + "' (expected z|t|zt|s)");
}

std::string ToString(const NormMethod& method) {
  switch (method.kind) {
    case NormKind::kZ:
      return "z";
    case NormKind::kT:
      return "t";
    case NormKind::kZT:
      return "zt";
    case NormKind::kS:
      return method.adaptive_top.all()
                 ? "s"
                 : "s(top=" + method.adaptive_top.ToString() + ")";
  }
  return "?";
}

CohortStats StatsFromScores(std::vector<double> scores, TopK top) {
  const int used = top.Clamp(static_cast<int>(scores.size()));
  if (used < 2) throw Error("cohort statistics need at least two scores");
  if (used < static_cast<int>(scores.size())) {
    std::nth_element(scores.begin(), scores.begin() + used, scores.end(),
                     std::greater<>());
    scores.resize(used);
    // Fixed summation order regardless of the selection algorithm.
    std::sort(scores.begin(), scores.end(), std::greater<>());
  }
  double sum = 0.0;
  for (double s : scores) sum += s;
  const double mu = sum / used;
  double ss = 0.0;
  for (double s : scores) ss += (s - mu) * (s - mu);
  const double sigma = std::sqrt(ss / used);
  if (!(sigma > 1e-12 * std::max(1.0, std::abs(mu)))) {
    throw Error("degenerate cohort: zero score standard deviation");
  }
  return {mu, sigma};
}

CohortStats ComputeCohortStats(const Vec& embedding,
                               const std::vector<Vec>& cohort,
                               const PairScorer& scorer) {
  if (cohort.size() < 2) throw Error("cohort must hold at least 2 members");
  std::vector<double> scores;
  scores.reserve(cohort.size());
  for (const auto& c : cohort) {
    scores.push_back(scorer ? scorer(embedding, c) : VertexScore(embedding, c));
  }
  return StatsFromScores(std::move(scores));
}

double Normalize(double raw, const NormMethod& method,
                 const std::optional<CohortStats>& enroll_stats,
                 const std::optional<CohortStats>& test_stats) {
  const bool need_enroll = method.kind != NormKind::kT;
  const bool need_test = method.kind != NormKind::kZ;
  if (need_enroll && !enroll_stats) {
    throw Error(ToString(method) + "-norm requires enroll-side statistics");
  }
  if (need_test && !test_stats) {
    throw Error(ToString(method) + "-norm requires test-side statistics");
  }
  switch (method.kind) {
    case NormKind::kZ:
      return (raw - enroll_stats->mu) / enroll_stats->sigma;
    case NormKind::kT:
      return (raw - test_stats->mu) / test_stats->sigma;
    case NormKind::kZT: {
      const double z = (raw - enroll_stats->mu) / enroll_stats->sigma;
      return (z - test_stats->mu) / test_stats->sigma;
    }
    case NormKind::kS:
      return 0.5 * ((raw - enroll_stats->mu) / enroll_stats->sigma +
                    (raw - test_stats->mu) / test_stats->sigma);
  }
  throw Error("unknown normalization method");
}

CohortNormalizer::CohortNormalizer(std::vector<Vec> cohort, NormMethod method)
    : cohort_(std::move(cohort)), method_(method) {
  if (cohort_.size() < 2) throw Error("cohort must hold at least 2 members");
  for (const auto& c : cohort_) {
    const double n = c.norm();
    if (n == 0.0) throw Error("cohort member with zero norm");
    cohort_norms_.push_back(n);
  }
  if (method_.kind == NormKind::kZT) {
    if (cohort_.size() < 3) {
      throw Error("zt-norm needs a cohort of at least 3 members");
    }
    member_stats_.reserve(cohort_.size());
    for (size_t k = 0; k < cohort_.size(); ++k) {
      std::vector<double> scores;
      scores.reserve(cohort_.size() - 1);
      for (size_t l = 0; l < cohort_.size(); ++l) {
        if (l == k) continue;
        scores.push_back(cohort_[k].dot(cohort_[l]) /
                         (cohort_norms_[k] * cohort_norms_[l]));
      }
      member_stats_.push_back(StatsFromScores(std::move(scores)));
    }
  }
}

std::vector<double> CohortNormalizer::RawScores(const Vec& embedding) const {
  if (embedding.size() != cohort_.front().size()) {
    throw Error("cohort normalization: dimension mismatch");
  }
  const double n = embedding.norm();
  if (n == 0.0) throw Error("cohort normalization: zero-norm embedding");
  std::vector<double> scores(cohort_.size());
  for (size_t k = 0; k < cohort_.size(); ++k) {
    scores[k] = embedding.dot(cohort_[k]) / (n * cohort_norms_[k]);
  }
  return scores;
}

SideStats CohortNormalizer::Stats(const Vec& embedding) const {
  std::vector<double> scores = RawScores(embedding);
  SideStats out;
  if (method_.kind == NormKind::kZT) {
    std::vector<double> z(scores.size());
    for (size_t k = 0; k < scores.size(); ++k) {
      z[k] = (scores[k] - member_stats_[k].mu) / member_stats_[k].sigma;
    }
    out.zt = StatsFromScores(std::move(z));
  }
  const TopK top =
      method_.kind == NormKind::kS ? method_.adaptive_top : TopK::All();
  out.plain = StatsFromScores(std::move(scores), top);
  return out;
}

double CohortNormalizer::Apply(double raw, const SideStats& enroll,
                               const SideStats& test) const {
  if (method_.kind == NormKind::kZT) {
    return Normalize(raw, method_, enroll.plain, test.zt);
  }
  return Normalize(raw, method_, enroll.plain, test.plain);
}

namespace {

ScoredTrialList NormalizeImpl(const ScoredTrialList& raw,
                              const EmbeddingSet& set,
                              const EmbeddingSet& cohort,
                              const NormMethod& method) {
  ScoredTrialList out;
  if (raw.empty()) return out;
  const CohortNormalizer normalizer(cohort.Vectors(), method);
  std::unordered_map<std::string, SideStats> cache;
  auto stats_of = [&](const std::string& id) -> const SideStats& {
    auto it = cache.find(id);
    if (it == cache.end()) {
      it = cache.emplace(id, normalizer.Stats(set.Find(id).vector)).first;
    }
    return it->second;
  };
  out.reserve(raw.size());
  for (const auto& s : raw) {
    const SideStats& e = stats_of(s.trial.enroll);
    const SideStats& t = stats_of(s.trial.test);
    out.push_back({s.trial, normalizer.Apply(s.score, e, t)});
  }
  return out;
}

}  // namespace

ScoredTrialList NormalizeTrials(const TrialList& trials,
                                const EmbeddingSet& set,
                                const EmbeddingSet& cohort,
                                const NormMethod& method) {
  CheckTrialsResolvable(trials, set);
  ScoredTrialList raw;
  raw.reserve(trials.size());
  for (const auto& t : trials) {
    raw.push_back(
        {t, VertexScore(set.Find(t.enroll).vector, set.Find(t.test).vector)});
  }
  return NormalizeImpl(raw, set, cohort, method);
}

ScoredTrialList NormalizeScores(const ScoredTrialList& scored,
                                const EmbeddingSet& set,
                                const EmbeddingSet& cohort,
                                const NormMethod& method) {
  for (size_t i = 0; i < scored.size(); ++i) {
    for (const auto* id : {&scored[i].trial.enroll, &scored[i].trial.test}) {
      if (!set.Contains(*id)) {
        throw Error("trial " + std::to_string(i) + " references unknown id '" +
                    *id + "'");
      }
    }
  }
  return NormalizeImpl(scored, set, cohort, method);
}

}  // namespace asg
