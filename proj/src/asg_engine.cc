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

#include "asg/asg_engine.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace asg {

namespace {

// Dot product of row `i` of `w` with `y`, summed in index order. Shared by
// every refinement path so they agree bit for bit.
double RowDot(const Mat& w, Eigen::Index i, const Vec& y) {
  double acc = 0.0;
  for (Eigen::Index l = 0; l < y.size(); ++l) acc += w(i, l) * y[l];
  return acc;
}

void CheckLambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
}

}  // namespace

void AsgConfig::Validate() const {
  CheckLambda(lambda);
  if (iterations < 0) throw Error("iterations must be >= 0");
  if (!std::isfinite(alpha)) throw Error("alpha must be finite");
}

double EffectiveAlpha(const AsgConfig& config, const EdgeScorerParams* params) {
  if (config.edge_mode == EdgeMode::kTrained) {
    if (params == nullptr) {
      throw Error("trained edge mode requires edge scorer parameters");
    }
    return params->alpha;
  }
  return config.alpha;
}

Graph BuildGraph(const Vec& anchor, const std::vector<Vec>& others,
                 const AsgConfig& config, const EdgeScorerParams* params,
                 std::vector<std::string> labels) {
  if (others.empty()) throw Error("graph needs at least one vertex");
  if (!labels.empty() && labels.size() != others.size()) {
    throw Error("vertex label count does not match vertex count");
  }
  Graph g;
  g.y0.resize(static_cast<Eigen::Index>(others.size()));
  for (size_t i = 0; i < others.size(); ++i) {
    g.y0[static_cast<Eigen::Index>(i)] = VertexScore(anchor, others[i]);
  }
  g.edges = EdgeMatrix(others, config.edge_mode, params);
  g.vertex_labels = std::move(labels);
  return g;
}

std::vector<int> SelectNeighbors(std::span<const double> logits, int row,
                                 TopK top_k) {
  const int n = static_cast<int>(logits.size());
  std::vector<int> idx;
  idx.reserve(n > 0 ? n - 1 : 0);
  for (int j = 0; j < n; ++j) {
    if (j != row) idx.push_back(j);
  }
  const int keep = top_k.Clamp(static_cast<int>(idx.size()));
  if (keep < static_cast<int>(idx.size())) {
    auto better = [&](int a, int b) {
      return logits[a] > logits[b] || (logits[a] == logits[b] && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + keep, idx.end(), better);
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

void WeightRow(std::span<const double> edge_row, int row, double alpha,
               TopK top_k, bool self_edges, std::span<double> out) {
  const int n = static_cast<int>(edge_row.size());
  if (static_cast<int>(out.size()) != n) {
    throw Error("weight row: output length mismatch");
  }
  if (row < 0 || row >= n) throw Error("weight row: row index out of range");
  if (n == 1 && !self_edges) {
    throw Error(
        "single-vertex graph without self edges: no candidate to normalize "
        "over");
  }
  std::vector<double> logits(n);
  for (int j = 0; j < n; ++j) logits[j] = alpha * edge_row[j];
  const std::vector<int> kept = SelectNeighbors(logits, row, top_k);

  const double self_logit = alpha * 1.0;
  double shift = self_edges ? self_logit
                            : -std::numeric_limits<double>::infinity();
  for (int j : kept) shift = std::max(shift, logits[j]);

  std::fill(out.begin(), out.end(), 0.0);
  double total = 0.0;
  for (int j : kept) {
    out[j] = std::exp(logits[j] - shift);
  }
  if (self_edges) out[row] = std::exp(self_logit - shift);
  for (int j = 0; j < n; ++j) total += out[j];
  for (int j = 0; j < n; ++j) out[j] /= total;
}

Mat WeightMatrix(const Mat& edges, double alpha, TopK top_k, bool self_edges) {
  const Eigen::Index n = edges.rows();
  if (n < 1 || edges.cols() != n) {
    throw Error("weight matrix: edge matrix must be square and nonempty");
  }
  // Row-major scratch so each row is contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> s =
      edges;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(n,
                                                                           n);
  for (Eigen::Index i = 0; i < n; ++i) {
    WeightRow({s.row(i).data(), static_cast<size_t>(n)}, static_cast<int>(i),
              alpha, top_k, self_edges,
              {w.row(i).data(), static_cast<size_t>(n)});
  }
  return w;
}

Vec Refine(const Vec& y0, const Mat& weights, double lambda, int iterations) {
  CheckLambda(lambda);
  if (iterations < 0) throw Error("iterations must be >= 0");
  if (weights.rows() != y0.size() || weights.cols() != y0.size()) {
    throw Error("refine: weight matrix does not match score vector");
  }
  if (lambda == 0.0 || iterations == 0) return y0;
  Vec prev = y0;
  Vec next(y0.size());
  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
      next[i] = (1.0 - lambda) * y0[i] + lambda * RowDot(weights, i, prev);
    }
    std::swap(prev, next);
  }
  return prev;
}

Vec FixedPoint(const Vec& y0, const Mat& weights, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw Error("fixed point requires 0 <= lambda < 1");
  }
  if (weights.rows() != y0.size() || weights.cols() != y0.size()) {
    throw Error("fixed point: weight matrix does not match score vector");
  }
  const Eigen::Index n = y0.size();
  Mat system = Mat::Identity(n, n) - lambda * weights;
  return system.partialPivLu().solve((1.0 - lambda) * y0);
}

AsgScorer::AsgScorer(std::vector<Vec> auxiliaries, AsgConfig config,
                     std::optional<EdgeScorerParams> params,
                     const CohortNormalizer* normalizer)
    : aux_(std::move(auxiliaries)),
      config_(config),
      params_(std::move(params)),
      normalizer_(normalizer) {
  config_.Validate();
  if (params_) params_->Validate();
  alpha_ = EffectiveAlpha(config_, this->params());
  for (const auto& a : aux_) {
    if (a.norm() == 0.0) throw Error("auxiliary embedding with zero norm");
  }
  if (normalizer_ != nullptr) {
    aux_stats_.reserve(aux_.size());
    for (const auto& a : aux_) aux_stats_.push_back(normalizer_->Stats(a));
  }
  if (config_.iterations > 1 && config_.lambda > 0.0 && !aux_.empty()) {
    aux_edges_ = EdgeMatrix(aux_, config_.edge_mode, this->params());
  }
}

AsgScorer::Segment AsgScorer::Prepare(const Vec& v) const {
  Segment s;
  s.vector = v;
  const auto m = static_cast<Eigen::Index>(aux_.size());
  s.vertex_to_aux.resize(m);
  s.edge_to_aux.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    s.vertex_to_aux[k] = VertexScore(v, aux_[k]);
    s.edge_to_aux[k] = config_.edge_mode == EdgeMode::kCosine
                           ? s.vertex_to_aux[k]
                           : EdgeScore(v, aux_[k], *params_);
  }
  if (normalizer_ != nullptr) s.stats = normalizer_->Stats(v);
  return s;
}

double AsgScorer::VertexValue(double raw, const Segment& anchor,
                              const SideStats* vertex_stats) const {
  if (normalizer_ == nullptr) return raw;
  if (!anchor.stats || vertex_stats == nullptr) {
    throw Error("segment prepared without normalization statistics");
  }
  return normalizer_->Apply(raw, *vertex_stats, *anchor.stats);
}

double AsgScorer::ScoreHat(std::span<const Segment> a,
                           std::span<const Segment> b) const {
  if (a.empty() || b.empty()) throw Error("pair score needs nonempty segments");
  const auto q = static_cast<Eigen::Index>(b.size());
  const auto m = static_cast<Eigen::Index>(aux_.size());
  const Eigen::Index n = q + m;
  if (n == 1 && !config_.self_edges) {
    throw Error(
        "degenerate single-vertex graph (one reference segment, no "
        "auxiliaries, self edges off)");
  }
  for (const auto& seg : b) {
    if (seg.vertex_to_aux.size() != m) {
      throw Error("segment was prepared for a different auxiliary bank");
    }
  }

  const bool refine = config_.lambda != 0.0 && config_.iterations != 0;
  const bool single_step = config_.iterations == 1;

  // Rows of the edge matrix that belong to the B vertices.
  Mat b_rows;
  Mat weights;  // rows 0..q-1 for a single step, the full matrix otherwise
  if (refine) {
    b_rows = Mat::Zero(q, n);
    for (Eigen::Index j = 0; j < q; ++j) {
      for (Eigen::Index l = j + 1; l < q; ++l) {
        const double v = PairEdgeScore(b[j].vector, b[l].vector,
                                       config_.edge_mode, params());
        b_rows(j, l) = v;
        b_rows(l, j) = v;
      }
      b_rows.row(j).tail(m) = b[j].edge_to_aux.transpose();
    }
    if (single_step) {
      weights.resize(q, n);
      Vec row(n);
      Vec out(n);
      for (Eigen::Index j = 0; j < q; ++j) {
        row = b_rows.row(j).transpose();
        WeightRow({row.data(), static_cast<size_t>(n)}, static_cast<int>(j),
                  alpha_, config_.top_k, config_.self_edges,
                  {out.data(), static_cast<size_t>(n)});
        weights.row(j) = out.transpose();
      }
    } else {
      Mat edges(n, n);
      edges.topRows(q) = b_rows;
      edges.bottomLeftCorner(m, q) = b_rows.rightCols(m).transpose();
      if (m > 0) edges.bottomRightCorner(m, m) = aux_edges_;
      weights = WeightMatrix(edges, alpha_, config_.top_k, config_.self_edges);
    }
  }

  double total = 0.0;
  Vec y0(n);
  for (const auto& anchor : a) {
    for (Eigen::Index j = 0; j < q; ++j) {
      const double raw = VertexScore(anchor.vector, b[j].vector);
      y0[j] = VertexValue(raw, anchor, b[j].stats ? &*b[j].stats : nullptr);
    }
    if (refine) {
      if (anchor.vertex_to_aux.size() != m) {
        throw Error("segment was prepared for a different auxiliary bank");
      }
      for (Eigen::Index k = 0; k < m; ++k) {
        y0[q + k] = VertexValue(anchor.vertex_to_aux[k], anchor,
                                normalizer_ ? &aux_stats_[k] : nullptr);
      }
    }
    if (!refine) {
      for (Eigen::Index j = 0; j < q; ++j) total += y0[j];
    } else if (single_step) {
      const double lambda = config_.lambda;
      for (Eigen::Index j = 0; j < q; ++j) {
        total += (1.0 - lambda) * y0[j] + lambda * RowDot(weights, j, y0);
      }
    } else {
      const Vec yn = Refine(y0, weights, config_.lambda, config_.iterations);
      for (Eigen::Index j = 0; j < q; ++j) total += yn[j];
    }
  }
  return total / static_cast<double>(a.size() * b.size());
}

double AsgScorer::Score(std::span<const Segment> a,
                        std::span<const Segment> b) const {
  return 0.5 * (ScoreHat(a, b) + ScoreHat(b, a));
}

double AsgScorer::Score(const std::vector<Vec>& a,
                        const std::vector<Vec>& b) const {
  std::vector<Segment> sa, sb;
  for (const auto& v : a) sa.push_back(Prepare(v));
  for (const auto& v : b) sb.push_back(Prepare(v));
  return Score(sa, sb);
}

Mat AsgScorer::ContributionWeights(const std::vector<Vec>& tests) const {
  if (tests.empty() || aux_.empty()) {
    throw Error("contribution weights need test and auxiliary embeddings");
  }
  const auto m = static_cast<Eigen::Index>(aux_.size());
  Mat out(static_cast<Eigen::Index>(tests.size()), m);
  Vec row(m + 1);
  Vec w(m + 1);
  for (size_t t = 0; t < tests.size(); ++t) {
    const Segment seg = Prepare(tests[t]);
    row[0] = 0.0;
    row.tail(m) = seg.edge_to_aux;
    WeightRow({row.data(), static_cast<size_t>(m + 1)}, 0, alpha_,
              config_.top_k, /*self_edges=*/false,
              {w.data(), static_cast<size_t>(m + 1)});
    out.row(static_cast<Eigen::Index>(t)) = w.tail(m).transpose();
  }
  return out;
}

double PairScore(const std::vector<Vec>& segs_a, const std::vector<Vec>& segs_b,
                 const std::vector<Vec>& auxiliaries, const AsgConfig& config,
                 const EdgeScorerParams* params) {
  std::optional<EdgeScorerParams> p;
  if (params != nullptr) p = *params;
  const AsgScorer scorer(auxiliaries, config, std::move(p));
  return scorer.Score(segs_a, segs_b);
}

Mat ContributionWeights(const std::vector<Vec>& tests,
                        const std::vector<Vec>& auxiliaries,
                        const AsgConfig& config,
                        const EdgeScorerParams* params) {
  std::optional<EdgeScorerParams> p;
  if (params != nullptr) p = *params;
  const AsgScorer scorer(auxiliaries, config, std::move(p));
  return scorer.ContributionWeights(tests);
}

}  // namespace asg
