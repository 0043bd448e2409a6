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

#ifndef ASG_SCORE_NORM_H_
#define ASG_SCORE_NORM_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asg/common.h"
#include "asg/embedding_store.h"

namespace asg {

// Mean and population standard deviation of a set of cohort scores.
struct CohortStats {
  double mu = 0.0;
  double sigma = 1.0;
};

enum class NormKind { kZ, kT, kZT, kS };

struct NormMethod {
  NormKind kind = NormKind::kS;
  // Only used by s-norm: statistics over the top-n cohort scores.
  TopK adaptive_top = TopK::All();

  static NormMethod Z() { return {NormKind::kZ}; }
  static NormMethod T() { return {NormKind::kT}; }
  static NormMethod ZT() { return {NormKind::kZT}; }
  static NormMethod S(TopK top = TopK::All()) { return {NormKind::kS, top}; }
};

// "z", "t", "zt" or "s"; `snorm_top` only applies to "s".
NormMethod ParseNormMethod(const std::string& name,
                           TopK snorm_top = TopK::All());
std::string ToString(const NormMethod& method);

using PairScorer = std::function<double(const Vec&, const Vec&)>;

// Statistics of `scores` (or of their `top` largest values).
// Throws when fewer than two scores are used or sigma is zero.
CohortStats StatsFromScores(std::vector<double> scores,
                            TopK top = TopK::All());

// Stats of the scores between `embedding` and every cohort member.
// The scorer defaults to cosine similarity.
CohortStats ComputeCohortStats(const Vec& embedding,
                               const std::vector<Vec>& cohort,
                               const PairScorer& scorer = {});

// Z: (raw - mu_e) / sigma_e
// T: (raw - mu_t) / sigma_t
// ZT: ((raw - mu_e) / sigma_e - mu_t) / sigma_t, where the test stats are
//     those of z-normalized cohort scores (see CohortNormalizer)
// S: average of the Z and T forms.
// Throws when a required side is missing.
double Normalize(double raw, const NormMethod& method,
                 const std::optional<CohortStats>& enroll_stats,
                 const std::optional<CohortStats>& test_stats);

// Per-utterance statistics needed by a method.
struct SideStats {
  CohortStats plain;                 // scores against the cohort
  std::optional<CohortStats> zt;     // z-normalized cohort scores (ZT only)
};

// Cohort statistics computation for a fixed cohort and method, with cosine
// scoring. Immutable after construction; safe for concurrent use.
class CohortNormalizer {
 public:
  CohortNormalizer(std::vector<Vec> cohort, NormMethod method);

  const NormMethod& method() const { return method_; }
  size_t cohort_size() const { return cohort_.size(); }

  SideStats Stats(const Vec& embedding) const;
  double Apply(double raw, const SideStats& enroll,
               const SideStats& test) const;

 private:
  std::vector<Vec> cohort_;
  std::vector<double> cohort_norms_;
  NormMethod method_;
  // ZT: every cohort member's stats against the rest of the cohort.
  std::vector<CohortStats> member_stats_;

  std::vector<double> RawScores(const Vec& embedding) const;
};

// Raw cosine score for every trial, then normalized. Stats are computed once
// per unique utterance.
ScoredTrialList NormalizeTrials(const TrialList& trials,
                                const EmbeddingSet& set,
                                const EmbeddingSet& cohort,
                                const NormMethod& method);

// Same, but normalizes the scores already attached to the trials.
ScoredTrialList NormalizeScores(const ScoredTrialList& scored,
                                const EmbeddingSet& set,
                                const EmbeddingSet& cohort,
                                const NormMethod& method);

}  // namespace asg

#endif  // ASG_SCORE_NORM_H_
