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

#ifndef ASG_EDGE_SCORER_H_
#define ASG_EDGE_SCORER_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asg/common.h"

namespace asg {

// Parameters of the learned edge scorer
//   S(i,j) = sigmoid(w . BN((f_i - f_j)^2) + b)
// plus the softmax scale alpha used when turning edges into weights.
struct EdgeScorerParams {
  Vec bn_gamma;
  Vec bn_beta;
  Vec bn_mean;  // running statistics, used at inference
  Vec bn_var;
  double bn_eps = 1e-5;
  Vec fc_weight;
  double fc_bias = 0.0;
  double alpha = 1.0;

  // Identity batch norm, zero FC, alpha = 1.
  static EdgeScorerParams Default(int dim);

  int dim() const { return static_cast<int>(fc_weight.size()); }
  // Throws asg::Error on inconsistent sizes, negative variance,
  // non-positive eps or non-finite values.
  void Validate() const;
};

enum class EdgeMode { kTrained, kCosine };

EdgeMode ParseEdgeMode(const std::string& text);
std::string ToString(EdgeMode mode);

// Per-feature statistics used to normalize edge features.
struct BatchStats {
  Vec mean;
  Vec var;
};

// Cosine similarity. Throws on a dimension mismatch or a zero-norm input.
double VertexScore(const Vec& a, const Vec& b);

// (a - b) squared component-wise.
Vec EdgeFeature(const Vec& a, const Vec& b);

// Learned edge score in (0, 1). Uses `batch_stats` when given, otherwise the
// running statistics stored in `params`.
double EdgeScore(const Vec& a, const Vec& b, const EdgeScorerParams& params,
                 const std::optional<BatchStats>& batch_stats = std::nullopt);

// Symmetric N x N matrix of pairwise edge scores with a zero diagonal. Each
// unordered pair is evaluated once and mirrored. `params` is required for
// EdgeMode::kTrained and ignored for kCosine.
Mat EdgeMatrix(const std::vector<Vec>& vectors, EdgeMode mode,
               const EdgeScorerParams* params = nullptr);

// Edge score between two vectors for the given mode.
double PairEdgeScore(const Vec& a, const Vec& b, EdgeMode mode,
                     const EdgeScorerParams* params);

// Parameter files reuse the embedding manifest/f32 layout: <stem>.manifest
// carries dim, dtype, the scalars and the order of the vector blocks;
// <stem>.f32 holds bn_gamma, bn_beta, bn_mean, bn_var, fc_weight.
void SaveEdgeScorerParams(const EdgeScorerParams& params,
                          const std::filesystem::path& stem);
EdgeScorerParams LoadEdgeScorerParams(const std::filesystem::path& stem);

}  // namespace asg

#endif  // ASG_EDGE_SCORER_H_
