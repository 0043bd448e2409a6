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

#ifndef ASG_GHOST_TRAINER_H_
#define ASG_GHOST_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "asg/common.h"
#include "asg/edge_scorer.h"
#include "asg/embedding_store.h"

namespace asg {

// Trainable auxiliary embeddings, one per row.
struct GhostDictionary {
  Mat embeddings;  // G x d

  int count() const { return static_cast<int>(embeddings.rows()); }
  int dim() const { return static_cast<int>(embeddings.cols()); }
  std::vector<Vec> Vectors() const;
  // Ids "ghost0000".., speaker equal to the id.
  EmbeddingSet ToEmbeddingSet() const;
  static GhostDictionary FromEmbeddingSet(const EmbeddingSet& set);
};

// i.i.d. N(0, 1/d) entries, reproducible from `seed`.
GhostDictionary InitGhosts(int count, int dim, uint64_t seed);

// Every group draws 4 speakers with 4 utterances each and splits them into a
// ladder: 10 anchor columns {a1..a4, b1..b3, c1, c2, d1} and 6 real vertex
// rows {b4, c3, c4, d2, d3, d4}, so a-anchors meet no same-speaker vertex,
// b-anchors one, c-anchors two and d1 three. The G ghost vertices follow the
// real rows. All columns of a group share one graph (same vertices, edges
// and weights).
inline constexpr int kLadderSpeakers = 4;
inline constexpr int kLadderUtterances = 4;
inline constexpr int kLadderAnchors = 10;
inline constexpr int kLadderVertices = 6;

struct LadderGroup {
  std::vector<std::string> vertex_ids;  // real rows
  std::vector<std::string> anchor_ids;  // columns
  std::vector<Vec> vertices;
  std::vector<Vec> anchors;
  // Ground truth, (6 + G) x 10; 1 iff same speaker. Ghost rows are masked.
  Mat vertex_labels;
  BoolMat vertex_mask;  // true where the entry counts in the loss
  // (6 + G) x (6 + G); diagonal and ghost rows/columns masked.
  Mat edge_labels;
  BoolMat edge_mask;

  int num_vertices() const { return static_cast<int>(vertex_labels.rows()); }
};

struct LadderBatch {
  int num_ghosts = 0;
  std::vector<LadderGroup> groups;
};

// Optimization and graph settings for ghost training.
struct TrainConfig {
  double learning_rate_graph = 0.005;
  int epochs = 1;
  int steps_per_epoch = 200;
  int groups_per_batch = 8;
  double lambda = 0.2;
  int iterations = 1;
  TopK top_k = TopK::All();
  bool self_edges = false;
  double momentum = 0.9;
  double weight_decay = 0.001;
  double bn_momentum = 0.9;   // running = m * running + (1 - m) * batch
  bool cosine_schedule = false;
  uint64_t seed = 0;

  void Validate() const;
  int total_steps() const { return epochs * steps_per_epoch; }
};

// Samples `groups_per_batch` ladder groups. Needs at least 4 speakers with at
// least 4 utterances each.
LadderBatch MakeLadderBatch(const EmbeddingSet& set, int groups_per_batch,
                            int num_ghosts, uint64_t seed);

// Per-group scores produced by a forward pass.
struct GroupScores {
  Mat refined;  // (6 + G) x 10 vertex scores after refinement, in [-1, 1]
  Mat edges;    // (6 + G) x (6 + G) edge scores in (0, 1)
};

inline constexpr double kBceClamp = 1e-7;

// Mean binary cross-entropy over the counted vertex entries (scores mapped
// from [-1, 1] to [0, 1] by (c + 1) / 2) plus mean binary cross-entropy over
// the counted edge entries (upper triangle). Predictions are clamped to
// [1e-7, 1 - 1e-7].
double PairLoss(const std::vector<GroupScores>& scores,
                const LadderBatch& batch);

// Single-term helper: BCE of one prediction in (0, 1).
double BinaryCrossEntropy(double prediction, double label);

struct Gradients {
  Mat ghosts;
  Vec bn_gamma;
  Vec bn_beta;
  Vec fc_weight;
  double fc_bias = 0.0;
  double alpha = 0.0;
};

struct ForwardResult {
  double loss = 0.0;
  std::vector<GroupScores> scores;
  BatchStats batch_stats;  // edge feature statistics of this batch
};

// Forward pass in training mode: edge features are normalized with the
// statistics of the whole batch.
ForwardResult Forward(const LadderBatch& batch, const GhostDictionary& ghosts,
                      const EdgeScorerParams& params, const TrainConfig& config);

// Loss and analytic gradients w.r.t. ghosts, BN affine, FC and alpha.
ForwardResult Backward(const LadderBatch& batch, const GhostDictionary& ghosts,
                       const EdgeScorerParams& params,
                       const TrainConfig& config, Gradients* grads);

struct GradCheckReport {
  double ghosts = 0.0;
  double bn_gamma = 0.0;
  double bn_beta = 0.0;
  double fc_weight = 0.0;
  double fc_bias = 0.0;
  double alpha = 0.0;

  double max() const;
};

// Central finite differences of the loss against the analytic gradient for
// every scalar parameter (a seeded sample of at most `max_ghost_entries`
// ghost entries). Each entry of the report is
// max |g_fd - g| / max(|g_fd|, |g|, 1e-8) over that parameter class.
GradCheckReport GradCheck(const LadderBatch& batch,
                          const GhostDictionary& ghosts,
                          const EdgeScorerParams& params,
                          const TrainConfig& config, double epsilon,
                          int max_ghost_entries = 64, uint64_t seed = 0);

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(int step, const std::string& what)
      : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct TrainResult {
  GhostDictionary ghosts;
  EdgeScorerParams params;
  std::vector<double> loss_history;  // one entry per step, pre-update loss
};

// SGD with momentum and weight decay on ghosts, BN affine, FC and alpha over
// freshly sampled ladder batches. Running BN statistics are tracked for
// inference. Throws TrainingDiverged when the loss stops being finite.
TrainResult Train(const EmbeddingSet& set, GhostDictionary ghosts,
                  EdgeScorerParams params, const TrainConfig& config);

// "step,loss" CSV with a header line.
void SaveLossHistory(const std::vector<double>& history,
                     const std::filesystem::path& path);

}  // namespace asg

#endif  // ASG_GHOST_TRAINER_H_
