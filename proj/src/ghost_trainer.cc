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

#include "asg/ghost_trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "asg/asg_engine.h"

namespace asg {

std::vector<Vec> GhostDictionary::Vectors() const {
  std::vector<Vec> out;
  out.reserve(embeddings.rows());
  for (Eigen::Index g = 0; g < embeddings.rows(); ++g) {
    out.push_back(embeddings.row(g).transpose());
  }
  return out;
}

EmbeddingSet GhostDictionary::ToEmbeddingSet() const {
  EmbeddingSet set(dim());
  char buf[32];
  for (int g = 0; g < count(); ++g) {
    std::snprintf(buf, sizeof(buf), "ghost%04d", g);
    set.Add({buf, buf, embeddings.row(g).transpose()});
  }
  return set;
}

GhostDictionary GhostDictionary::FromEmbeddingSet(const EmbeddingSet& set) {
  GhostDictionary d;
  d.embeddings.resize(static_cast<Eigen::Index>(set.size()), set.dim());
  for (size_t g = 0; g < set.size(); ++g) {
    d.embeddings.row(static_cast<Eigen::Index>(g)) = set[g].vector.transpose();
  }
  return d;
}

GhostDictionary InitGhosts(int count, int dim, uint64_t seed) {
  if (count < 1 || dim < 1) throw Error("ghost count and dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(dim));
  GhostDictionary d;
  d.embeddings.resize(count, dim);
  for (int g = 0; g < count; ++g) {
    for (int k = 0; k < dim; ++k) d.embeddings(g, k) = normal(rng);
  }
  return d;
}

void TrainConfig::Validate() const {
  if (!(learning_rate_graph >= 0.0)) {
    throw Error("learning rate must be non-negative");
  }
  if (epochs < 1 || steps_per_epoch < 1 || groups_per_batch < 1) {
    throw Error("epochs, steps per epoch and groups per batch must be >= 1");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("lambda must be in [0,1]");
  if (iterations < 1) throw Error("training needs iterations >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error("momentum must be in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw Error("weight decay must be >= 0");
  if (!(bn_momentum >= 0.0 && bn_momentum <= 1.0)) {
    throw Error("bn momentum must be in [0, 1]");
  }
}

LadderBatch MakeLadderBatch(const EmbeddingSet& set, int groups_per_batch,
                            int num_ghosts, uint64_t seed) {
  if (groups_per_batch < 1) throw Error("groups per batch must be >= 1");
  if (num_ghosts < 0) throw Error("ghost count must be >= 0");
  std::vector<std::string> eligible;
  for (const auto& spk : set.speakers()) {
    if (set.PositionsOf(spk).size() >= kLadderUtterances) {
      eligible.push_back(spk);
    }
  }
  if (eligible.size() < kLadderSpeakers) {
    throw Error("ladder batch needs at least 4 speakers with at least 4 "
                "utterances each, found " +
                std::to_string(eligible.size()));
  }

  std::mt19937_64 rng(seed);
  const int n = kLadderVertices + num_ghosts;
  LadderBatch batch;
  batch.num_ghosts = num_ghosts;
  for (int g = 0; g < groups_per_batch; ++g) {
    std::vector<std::string> speakers = eligible;
    std::shuffle(speakers.begin(), speakers.end(), rng);
    speakers.resize(kLadderSpeakers);
    // utts[s][u]: set positions of the 4 utterances of the s-th speaker.
    std::vector<std::vector<size_t>> utts;
    for (const auto& spk : speakers) {
      std::vector<size_t> pos = set.PositionsOf(spk);
      std::shuffle(pos.begin(), pos.end(), rng);
      pos.resize(kLadderUtterances);
      utts.push_back(std::move(pos));
    }

    // Speaker s contributes its first (4 - s) utterances as anchors and the
    // remaining s as vertices: a1..a4 | b1..b3, b4 | c1 c2, c3 c4 | d1, d2..d4.
    LadderGroup group;
    std::vector<int> anchor_spk, vertex_spk;
    for (int s = 0; s < kLadderSpeakers; ++s) {
      for (int u = 0; u < kLadderUtterances; ++u) {
        const Embedding& e = set[utts[s][u]];
        if (u < kLadderUtterances - s) {
          group.anchor_ids.push_back(e.id);
          group.anchors.push_back(e.vector);
          anchor_spk.push_back(s);
        } else {
          group.vertex_ids.push_back(e.id);
          group.vertices.push_back(e.vector);
          vertex_spk.push_back(s);
        }
      }
    }

    group.vertex_labels = Mat::Zero(n, kLadderAnchors);
    group.vertex_mask = BoolMat::Constant(n, kLadderAnchors, false);
    for (int r = 0; r < kLadderVertices; ++r) {
      for (int c = 0; c < kLadderAnchors; ++c) {
        group.vertex_labels(r, c) = vertex_spk[r] == anchor_spk[c] ? 1.0 : 0.0;
        group.vertex_mask(r, c) = true;
      }
    }
    group.edge_labels = Mat::Zero(n, n);
    group.edge_mask = BoolMat::Constant(n, n, false);
    for (int i = 0; i < kLadderVertices; ++i) {
      for (int j = 0; j < kLadderVertices; ++j) {
        if (i == j) continue;
        group.edge_labels(i, j) = vertex_spk[i] == vertex_spk[j] ? 1.0 : 0.0;
        group.edge_mask(i, j) = true;
      }
    }
    batch.groups.push_back(std::move(group));
  }
  return batch;
}

double BinaryCrossEntropy(double prediction, double label) {
  const double p = std::clamp(prediction, kBceClamp, 1.0 - kBceClamp);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

namespace {

// d BCE / d prediction, zero where the clamp is active.
double BceGrad(double prediction, double label) {
  if (prediction < kBceClamp || prediction > 1.0 - kBceClamp) return 0.0;
  return (prediction - label) / (prediction * (1.0 - prediction));
}

struct LossCounts {
  long vertices = 0;
  long edges = 0;
};

LossCounts CountTerms(const LadderBatch& batch) {
  LossCounts c;
  for (const auto& g : batch.groups) {
    c.vertices += g.vertex_mask.count();
    const int n = g.num_vertices();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) c.edges += g.edge_mask(i, j) ? 1 : 0;
    }
  }
  return c;
}

// Flattened view of one group's vertices: real rows then ghosts.
const Vec& VertexAt(const LadderGroup& group, const std::vector<Vec>& ghosts,
                    int r) {
  return r < kLadderVertices ? group.vertices[r] : ghosts[r - kLadderVertices];
}

struct GroupCache {
  Mat edges;             // S, zero diagonal
  Mat weights;           // W
  std::vector<Mat> ys;   // Y_0 .. Y_n
};

struct ForwardState {
  std::vector<Vec> ghost_vecs;
  std::vector<GroupCache> groups;
  BatchStats stats;
  Vec sd;  // sqrt(var + eps)
  long num_pairs = 0;
  double loss = 0.0;
};

void CheckBatch(const LadderBatch& batch, const GhostDictionary& ghosts,
                const EdgeScorerParams& params) {
  if (batch.groups.empty()) throw Error("empty ladder batch");
  if (batch.num_ghosts != ghosts.count() &&
      !(batch.num_ghosts == 0 && ghosts.embeddings.size() == 0)) {
    throw Error("ladder batch was built for " +
                std::to_string(batch.num_ghosts) + " ghosts, dictionary has " +
                std::to_string(ghosts.count()));
  }
  if (batch.num_ghosts > 0 && ghosts.dim() != params.dim()) {
    throw Error("ghost dimension does not match edge scorer dimension");
  }
  params.Validate();
}

ForwardState RunForward(const LadderBatch& batch, const GhostDictionary& ghosts,
                        const EdgeScorerParams& params,
                        const TrainConfig& config) {
  CheckBatch(batch, ghosts, params);
  ForwardState st;
  st.ghost_vecs = batch.num_ghosts > 0 ? ghosts.Vectors() : std::vector<Vec>{};
  const int d = params.dim();
  const int n = kLadderVertices + batch.num_ghosts;

  // Batch statistics of the edge features over every unordered pair of every
  // group, two passes in a fixed order.
  Vec sum = Vec::Zero(d);
  for (const auto& g : batch.groups) {
    for (int i = 0; i < n; ++i) {
      const Vec& ei = VertexAt(g, st.ghost_vecs, i);
      if (ei.size() != d) throw Error("embedding dimension mismatch in batch");
      for (int j = i + 1; j < n; ++j) {
        sum += (ei - VertexAt(g, st.ghost_vecs, j)).array().square().matrix();
        ++st.num_pairs;
      }
    }
  }
  if (st.num_pairs == 0) throw Error("ladder batch has no edges");
  st.stats.mean = sum / static_cast<double>(st.num_pairs);
  Vec sq = Vec::Zero(d);
  for (const auto& g : batch.groups) {
    for (int i = 0; i < n; ++i) {
      const Vec& ei = VertexAt(g, st.ghost_vecs, i);
      for (int j = i + 1; j < n; ++j) {
        const Vec x =
            (ei - VertexAt(g, st.ghost_vecs, j)).array().square().matrix();
        sq += (x - st.stats.mean).array().square().matrix();
      }
    }
  }
  st.stats.var = sq / static_cast<double>(st.num_pairs);
  st.sd = (st.stats.var.array() + params.bn_eps).sqrt().matrix();

  const double alpha = params.alpha;
  const double lambda = config.lambda;
  std::vector<GroupScores> scores;
  for (const auto& g : batch.groups) {
    GroupCache cache;
    cache.edges = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const Vec& ei = VertexAt(g, st.ghost_vecs, i);
      for (int j = i + 1; j < n; ++j) {
        const double s = EdgeScore(ei, VertexAt(g, st.ghost_vecs, j), params,
                                   st.stats);
        cache.edges(i, j) = s;
        cache.edges(j, i) = s;
      }
    }
    cache.weights =
        WeightMatrix(cache.edges, alpha, config.top_k, config.self_edges);

    Mat y0(n, kLadderAnchors);
    for (int r = 0; r < n; ++r) {
      const Vec& e = VertexAt(g, st.ghost_vecs, r);
      for (int c = 0; c < kLadderAnchors; ++c) {
        y0(r, c) = VertexScore(e, g.anchors[c]);
      }
    }
    cache.ys.push_back(std::move(y0));
    for (int t = 1; t <= config.iterations; ++t) {
      Mat next = (1.0 - lambda) * cache.ys.front() +
                 lambda * (cache.weights * cache.ys.back());
      cache.ys.push_back(std::move(next));
    }
    scores.push_back({cache.ys.back(), cache.edges});
    st.groups.push_back(std::move(cache));
  }
  st.loss = PairLoss(scores, batch);
  return st;
}

}  // namespace

double PairLoss(const std::vector<GroupScores>& scores,
                const LadderBatch& batch) {
  if (scores.size() != batch.groups.size()) {
    throw Error("pair loss: score/group count mismatch");
  }
  const LossCounts counts = CountTerms(batch);
  double vertex_sum = 0.0;
  double edge_sum = 0.0;
  for (size_t gi = 0; gi < scores.size(); ++gi) {
    const LadderGroup& g = batch.groups[gi];
    const GroupScores& s = scores[gi];
    if (s.refined.rows() != g.vertex_labels.rows() ||
        s.refined.cols() != g.vertex_labels.cols() ||
        s.edges.rows() != g.edge_labels.rows() ||
        s.edges.cols() != g.edge_labels.cols()) {
      throw Error("pair loss: score shape does not match labels");
    }
    for (Eigen::Index r = 0; r < s.refined.rows(); ++r) {
      for (Eigen::Index c = 0; c < s.refined.cols(); ++c) {
        if (!g.vertex_mask(r, c)) continue;
        vertex_sum += BinaryCrossEntropy(0.5 * (s.refined(r, c) + 1.0),
                                         g.vertex_labels(r, c));
      }
    }
    for (Eigen::Index i = 0; i < s.edges.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < s.edges.cols(); ++j) {
        if (!g.edge_mask(i, j)) continue;
        edge_sum += BinaryCrossEntropy(s.edges(i, j), g.edge_labels(i, j));
      }
    }
  }
  double loss = 0.0;
  if (counts.vertices > 0) loss += vertex_sum / counts.vertices;
  if (counts.edges > 0) loss += edge_sum / counts.edges;
  return loss;
}

ForwardResult Forward(const LadderBatch& batch, const GhostDictionary& ghosts,
                      const EdgeScorerParams& params,
                      const TrainConfig& config) {
  ForwardState st = RunForward(batch, ghosts, params, config);
  ForwardResult out;
  out.loss = st.loss;
  out.batch_stats = st.stats;
  for (auto& g : st.groups) out.scores.push_back({g.ys.back(), g.edges});
  return out;
}

ForwardResult Backward(const LadderBatch& batch, const GhostDictionary& ghosts,
                       const EdgeScorerParams& params,
                       const TrainConfig& config, Gradients* grads) {
  ForwardState st = RunForward(batch, ghosts, params, config);
  const int d = params.dim();
  const int n = kLadderVertices + batch.num_ghosts;
  const int num_ghosts = batch.num_ghosts;
  const double lambda = config.lambda;
  const double alpha = params.alpha;
  const LossCounts counts = CountTerms(batch);

  Gradients g;
  g.ghosts = Mat::Zero(num_ghosts, d);
  g.bn_gamma = Vec::Zero(d);
  g.bn_beta = Vec::Zero(d);
  g.fc_weight = Vec::Zero(d);

  // d loss / d S for every group, before the sigmoid.
  std::vector<Mat> d_edges;
  for (size_t gi = 0; gi < batch.groups.size(); ++gi) {
    const LadderGroup& grp = batch.groups[gi];
    const GroupCache& cache = st.groups[gi];

    // Vertex BCE on (y + 1) / 2.
    const Mat& yn = cache.ys.back();
    Mat grad_y = Mat::Zero(n, kLadderAnchors);
    if (counts.vertices > 0) {
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < kLadderAnchors; ++c) {
          if (!grp.vertex_mask(r, c)) continue;
          grad_y(r, c) = 0.5 *
                         BceGrad(0.5 * (yn(r, c) + 1.0), grp.vertex_labels(r, c)) /
                         static_cast<double>(counts.vertices);
        }
      }
    }

    // Unroll Y_t = (1 - lambda) Y_0 + lambda W Y_{t-1}.
    Mat grad_y0 = Mat::Zero(n, kLadderAnchors);
    Mat grad_w = Mat::Zero(n, n);
    for (int t = config.iterations; t >= 1; --t) {
      grad_y0 += (1.0 - lambda) * grad_y;
      grad_w += lambda * grad_y * cache.ys[t - 1].transpose();
      grad_y = lambda * cache.weights.transpose() * grad_y;
    }
    grad_y0 += grad_y;

    // Ghost rows of Y_0 are cosines against the anchors.
    for (int r = kLadderVertices; r < n; ++r) {
      const Vec& e = st.ghost_vecs[r - kLadderVertices];
      const double ne = e.norm();
      Vec ge = Vec::Zero(d);
      for (int c = 0; c < kLadderAnchors; ++c) {
        if (grad_y0(r, c) == 0.0) continue;
        const Vec& a = grp.anchors[c];
        const double na = a.norm();
        const double cos = cache.ys[0](r, c);
        ge += grad_y0(r, c) * (a / (ne * na) - cos * e / (ne * ne));
      }
      g.ghosts.row(r - kLadderVertices) += ge.transpose();
    }

    // Row softmax of alpha * S over the kept candidates.
    Mat grad_logits = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      double inner = 0.0;
      for (int j = 0; j < n; ++j) inner += cache.weights(i, j) * grad_w(i, j);
      for (int j = 0; j < n; ++j) {
        grad_logits(i, j) = cache.weights(i, j) * (grad_w(i, j) - inner);
      }
    }
    Mat grad_s = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) {
          if (config.self_edges) g.alpha += grad_logits(i, i) * 1.0;
          continue;
        }
        g.alpha += grad_logits(i, j) * cache.edges(i, j);
        grad_s(i, j) = alpha * grad_logits(i, j);
      }
    }
    // Fold onto unordered pairs and add the edge BCE term.
    Mat grad_pair = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double v = grad_s(i, j) + grad_s(j, i);
        if (grp.edge_mask(i, j) && counts.edges > 0) {
          v += BceGrad(cache.edges(i, j), grp.edge_labels(i, j)) /
               static_cast<double>(counts.edges);
        }
        const double s = cache.edges(i, j);
        grad_pair(i, j) = v * s * (1.0 - s);  // through the sigmoid
      }
    }
    d_edges.push_back(std::move(grad_pair));
  }

  // FC and batch norm. u_p = sum_k w_k (gamma_k xhat_pk + beta_k) + b.
  double du_sum = 0.0;
  Vec du_xhat = Vec::Zero(d);
  for (size_t gi = 0; gi < batch.groups.size(); ++gi) {
    const LadderGroup& grp = batch.groups[gi];
    for (int i = 0; i < n; ++i) {
      const Vec& ei = VertexAt(grp, st.ghost_vecs, i);
      for (int j = i + 1; j < n; ++j) {
        const double du = d_edges[gi](i, j);
        if (du == 0.0) continue;
        const Vec x =
            (ei - VertexAt(grp, st.ghost_vecs, j)).array().square().matrix();
        const Vec xhat = ((x - st.stats.mean).array() / st.sd.array()).matrix();
        du_sum += du;
        du_xhat += du * xhat;
      }
    }
  }
  g.fc_bias = du_sum;
  g.fc_weight = (params.bn_gamma.array() * du_xhat.array() +
                 params.bn_beta.array() * du_sum)
                    .matrix();
  g.bn_gamma = (params.fc_weight.array() * du_xhat.array()).matrix();
  g.bn_beta = params.fc_weight * du_sum;

  // Back through the batch statistics into the ghost vertices:
  // dx_pk = (w_k gamma_k / sd_k) (du_p - mean(du) - xhat_pk mean(du xhat_k)).
  if (num_ghosts > 0) {
    const double p = static_cast<double>(st.num_pairs);
    const Vec scale = (params.fc_weight.array() * params.bn_gamma.array() /
                       st.sd.array())
                          .matrix();
    const double mean_du = du_sum / p;
    const Vec mean_du_xhat = du_xhat / p;
    for (size_t gi = 0; gi < batch.groups.size(); ++gi) {
      const LadderGroup& grp = batch.groups[gi];
      for (int i = 0; i < n; ++i) {
        const Vec& ei = VertexAt(grp, st.ghost_vecs, i);
        for (int j = i + 1; j < n; ++j) {
          if (i < kLadderVertices && j < kLadderVertices) continue;
          const double du = d_edges[gi](i, j);
          const Vec diff = ei - VertexAt(grp, st.ghost_vecs, j);
          const Vec x = diff.array().square().matrix();
          const Vec xhat =
              ((x - st.stats.mean).array() / st.sd.array()).matrix();
          const Vec dx = (scale.array() * (du - mean_du -
                                           xhat.array() * mean_du_xhat.array()))
                             .matrix();
          const Vec de = (2.0 * dx.array() * diff.array()).matrix();
          if (i >= kLadderVertices) {
            g.ghosts.row(i - kLadderVertices) += de.transpose();
          }
          if (j >= kLadderVertices) {
            g.ghosts.row(j - kLadderVertices) -= de.transpose();
          }
        }
      }
    }
  }

  if (grads != nullptr) *grads = std::move(g);
  ForwardResult out;
  out.loss = st.loss;
  out.batch_stats = st.stats;
  for (auto& c : st.groups) out.scores.push_back({c.ys.back(), c.edges});
  return out;
}

double GradCheckReport::max() const {
  return std::max({ghosts, bn_gamma, bn_beta, fc_weight, fc_bias, alpha});
}

GradCheckReport GradCheck(const LadderBatch& batch,
                          const GhostDictionary& ghosts,
                          const EdgeScorerParams& params,
                          const TrainConfig& config, double epsilon,
                          int max_ghost_entries, uint64_t seed) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-4)) {
    throw Error("grad check epsilon must lie in [1e-7, 1e-4]");
  }
  Gradients analytic;
  Backward(batch, ghosts, params, config, &analytic);

  auto rel = [](double fd, double an) {
    return std::abs(fd - an) /
           std::max({std::abs(fd), std::abs(an), 1e-8});
  };
  auto loss_at = [&](const GhostDictionary& gd, const EdgeScorerParams& p) {
    return Forward(batch, gd, p, config).loss;
  };
  auto central = [&](auto&& perturb) {
    GhostDictionary gp = ghosts, gm = ghosts;
    EdgeScorerParams pp = params, pm = params;
    perturb(gp, pp, epsilon);
    perturb(gm, pm, -epsilon);
    return (loss_at(gp, pp) - loss_at(gm, pm)) / (2.0 * epsilon);
  };

  GradCheckReport report;
  auto check_vec = [&](Vec EdgeScorerParams::*member, const Vec& an,
                       double* slot) {
    for (Eigen::Index k = 0; k < an.size(); ++k) {
      const double fd = central([&](GhostDictionary&, EdgeScorerParams& p,
                                    double h) { (p.*member)[k] += h; });
      *slot = std::max(*slot, rel(fd, an[k]));
    }
  };
  check_vec(&EdgeScorerParams::bn_gamma, analytic.bn_gamma, &report.bn_gamma);
  check_vec(&EdgeScorerParams::bn_beta, analytic.bn_beta, &report.bn_beta);
  check_vec(&EdgeScorerParams::fc_weight, analytic.fc_weight,
            &report.fc_weight);
  report.fc_bias = rel(central([](GhostDictionary&, EdgeScorerParams& p,
                                  double h) { p.fc_bias += h; }),
                       analytic.fc_bias);
  report.alpha = rel(central([](GhostDictionary&, EdgeScorerParams& p,
                                double h) { p.alpha += h; }),
                     analytic.alpha);

  if (batch.num_ghosts > 0) {
    std::vector<std::pair<int, int>> entries;
    for (int r = 0; r < ghosts.count(); ++r) {
      for (int k = 0; k < ghosts.dim(); ++k) entries.emplace_back(r, k);
    }
    if (static_cast<int>(entries.size()) > max_ghost_entries) {
      std::mt19937_64 rng(seed);
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(std::max(max_ghost_entries, 0));
    }
    for (auto [r, k] : entries) {
      const double fd = central([&](GhostDictionary& gd, EdgeScorerParams&,
                                    double h) { gd.embeddings(r, k) += h; });
      report.ghosts = std::max(report.ghosts, rel(fd, analytic.ghosts(r, k)));
    }
  }
  return report;
}

namespace {

struct Momentum {
  Mat ghosts;
  Vec bn_gamma, bn_beta, fc_weight;
  double fc_bias = 0.0, alpha = 0.0;
};

template <typename T>
void SgdUpdate(T& param, const T& grad, T& velocity, double lr,
               const TrainConfig& c) {
  velocity = c.momentum * velocity + (grad + c.weight_decay * param);
  param -= lr * velocity;
}

void SgdUpdate(double& param, double grad, double& velocity, double lr,
               const TrainConfig& c) {
  velocity = c.momentum * velocity + (grad + c.weight_decay * param);
  param -= lr * velocity;
}

}  // namespace

TrainResult Train(const EmbeddingSet& set, GhostDictionary ghosts,
                  EdgeScorerParams params, const TrainConfig& config) {
  config.Validate();
  params.Validate();
  if (params.dim() != set.dim()) {
    throw Error("edge scorer dimension does not match the embeddings");
  }
  if (ghosts.count() > 0 && ghosts.dim() != set.dim()) {
    throw Error("ghost dimension does not match the embeddings");
  }
  const int d = set.dim();
  Momentum v;
  v.ghosts = Mat::Zero(ghosts.count(), ghosts.embeddings.cols());
  v.bn_gamma = Vec::Zero(d);
  v.bn_beta = Vec::Zero(d);
  v.fc_weight = Vec::Zero(d);

  std::mt19937_64 rng(config.seed);
  TrainResult result;
  const int total = config.total_steps();
  for (int step = 0; step < total; ++step) {
    const uint64_t batch_seed = rng();
    const LadderBatch batch = MakeLadderBatch(set, config.groups_per_batch,
                                              ghosts.count(), batch_seed);
    Gradients g;
    const ForwardResult fr = Backward(batch, ghosts, params, config, &g);
    if (!std::isfinite(fr.loss)) {
      throw TrainingDiverged(
          step, "training diverged: non-finite loss at step " +
                    std::to_string(step));
    }
    result.loss_history.push_back(fr.loss);

    double lr = config.learning_rate_graph;
    if (config.cosine_schedule) {
      lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * step / total));
    }
    if (ghosts.count() > 0) {
      SgdUpdate(ghosts.embeddings, g.ghosts, v.ghosts, lr, config);
    }
    SgdUpdate(params.bn_gamma, g.bn_gamma, v.bn_gamma, lr, config);
    SgdUpdate(params.bn_beta, g.bn_beta, v.bn_beta, lr, config);
    SgdUpdate(params.fc_weight, g.fc_weight, v.fc_weight, lr, config);
    SgdUpdate(params.fc_bias, g.fc_bias, v.fc_bias, lr, config);
    SgdUpdate(params.alpha, g.alpha, v.alpha, lr, config);

    const double m = config.bn_momentum;
    params.bn_mean = m * params.bn_mean + (1.0 - m) * fr.batch_stats.mean;
    params.bn_var = m * params.bn_var + (1.0 - m) * fr.batch_stats.var;

    if (!ghosts.embeddings.allFinite() || !params.fc_weight.allFinite() ||
        !params.bn_gamma.allFinite() || !std::isfinite(params.alpha)) {
      throw TrainingDiverged(
          step, "training diverged: non-finite parameter after step " +
                    std::to_string(step));
    }
  }
  result.ghosts = std::move(ghosts);
  result.params = std::move(params);
  return result;
}

void SaveLossHistory(const std::vector<double>& history,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,loss\n";
  char buf[64];
  for (size_t i = 0; i < history.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", history[i]);
    out << i << ',' << buf << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace asg
