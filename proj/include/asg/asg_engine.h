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

#ifndef ASG_ASG_ENGINE_H_
#define ASG_ASG_ENGINE_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asg/common.h"
#include "asg/edge_scorer.h"
#include "asg/score_norm.h"

namespace asg {

// Auxiliary speakers graph settings.
struct AsgConfig {
  double lambda = 0.2;    // weight of the propagated term in each update
  int iterations = 1;
  TopK top_k = TopK::Of(64);
  bool self_edges = false;
  EdgeMode edge_mode = EdgeMode::kCosine;
  double alpha = 1.0;     // softmax scale for cosine edges; trained edges
                          // carry their own alpha in EdgeScorerParams

  void Validate() const;
};

// Softmax scale in effect for `config` (params->alpha in trained mode).
double EffectiveAlpha(const AsgConfig& config, const EdgeScorerParams* params);

// One anchor's graph: vertex i holds the anchor-vs-others[i] score, edges are
// pairwise scores among the others.
struct Graph {
  Vec y0;
  Mat edges;
  std::vector<std::string> vertex_labels;  // optional, parallel to y0

  int size() const { return static_cast<int>(y0.size()); }
};

Graph BuildGraph(const Vec& anchor, const std::vector<Vec>& others,
                 const AsgConfig& config,
                 const EdgeScorerParams* params = nullptr,
                 std::vector<std::string> labels = {});

// Off-diagonal candidates of row `row` that survive top-k on `logits`,
// returned in ascending index order. Ties at the cut keep the lower index.
std::vector<int> SelectNeighbors(std::span<const double> logits, int row,
                                 TopK top_k);

// Row `row` of the contribution weight matrix computed from that row of the
// edge matrix. Writes exp(alpha * S) over the surviving candidates,
// normalized to sum to 1, into `out` (length N). With self_edges the
// diagonal takes S = 1 and is always kept; otherwise it is zero. A row with
// no candidate is an error.
void WeightRow(std::span<const double> edge_row, int row, double alpha,
               TopK top_k, bool self_edges, std::span<double> out);

// Row-stochastic N x N contribution weights.
Mat WeightMatrix(const Mat& edges, double alpha, TopK top_k, bool self_edges);

// y_n = (1 - lambda) y_0 + lambda W y_{n-1}, applied `iterations` times.
// lambda == 0 or iterations == 0 return y0 unchanged.
Vec Refine(const Vec& y0, const Mat& weights, double lambda, int iterations);

// Closed-form limit (1 - lambda)(I - lambda W)^{-1} y0, for 0 <= lambda < 1.
Vec FixedPoint(const Vec& y0, const Mat& weights, double lambda);

// Multi-segment pair scoring against a fixed auxiliary bank.
//
// For a directional score A -> B, one graph is built per segment A_m with
// vertices {B_1..B_q} followed by the auxiliaries, refined, and the first q
// refined entries are averaged over all (m, j). The symmetric score is the
// mean of both directions. When a normalizer is supplied, vertex scores are
// cohort-normalized before refinement (vertex as enroll side, anchor as test
// side); edges always use raw embeddings.
//
// Construction precomputes everything that depends only on the auxiliaries.
// Scoring is const and thread-safe.
class AsgScorer {
 public:
  // Cached per-segment quantities.
  struct Segment {
    Vec vector;
    Vec vertex_to_aux;  // raw cosine against each auxiliary
    Vec edge_to_aux;    // edge score against each auxiliary
    std::optional<SideStats> stats;
  };

  AsgScorer(std::vector<Vec> auxiliaries, AsgConfig config,
            std::optional<EdgeScorerParams> params = std::nullopt,
            const CohortNormalizer* normalizer = nullptr);

  const AsgConfig& config() const { return config_; }
  size_t num_auxiliaries() const { return aux_.size(); }

  Segment Prepare(const Vec& v) const;

  // Directional score; averages the refined B entries of every A_m graph.
  double ScoreHat(std::span<const Segment> a, std::span<const Segment> b) const;
  // Mean of both directions; exactly symmetric.
  double Score(std::span<const Segment> a, std::span<const Segment> b) const;
  double Score(const std::vector<Vec>& a, const std::vector<Vec>& b) const;

  // Contribution weight row each test vector assigns over the auxiliaries.
  Mat ContributionWeights(const std::vector<Vec>& tests) const;

 private:
  const EdgeScorerParams* params() const {
    return params_ ? &*params_ : nullptr;
  }
  double VertexValue(double raw, const Segment& anchor,
                     const SideStats* vertex_stats) const;

  std::vector<Vec> aux_;
  AsgConfig config_;
  std::optional<EdgeScorerParams> params_;
  const CohortNormalizer* normalizer_;
  double alpha_;
  std::vector<SideStats> aux_stats_;
  Mat aux_edges_;  // only filled when more than one iteration is run
};

// Symmetric pair score of two multi-segment utterances.
double PairScore(const std::vector<Vec>& segs_a, const std::vector<Vec>& segs_b,
                 const std::vector<Vec>& auxiliaries, const AsgConfig& config,
                 const EdgeScorerParams* params = nullptr);

// Rows of weights each test embedding assigns over the auxiliaries
// (diagnostic dump). Rows sum to 1.
Mat ContributionWeights(const std::vector<Vec>& tests,
                        const std::vector<Vec>& auxiliaries,
                        const AsgConfig& config,
                        const EdgeScorerParams* params = nullptr);

}  // namespace asg

#endif  // ASG_ASG_ENGINE_H_
