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

#include "asg/edge_scorer.h"

#include <cmath>
#include <cstdio>

#include "asg/embedding_store.h"

namespace asg {

namespace {

constexpr const char* kParamLayout = "bn_gamma,bn_beta,bn_mean,bn_var,fc_weight";

double Sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  double e = std::exp(u);
  return e / (1.0 + e);
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ManifestDouble(const Manifest& m, const std::string& key,
                      const std::filesystem::path& path) {
  auto it = m.find(key);
  if (it == m.end()) {
    throw Error(path.string() + ": missing key '" + key + "'");
  }
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw Error(path.string() + ": bad value for '" + key + "'");
  }
}

}  // namespace

EdgeScorerParams EdgeScorerParams::Default(int dim) {
  if (dim < 1) throw Error("edge scorer dimension must be positive");
  EdgeScorerParams p;
  p.bn_gamma = Vec::Ones(dim);
  p.bn_beta = Vec::Zero(dim);
  p.bn_mean = Vec::Zero(dim);
  p.bn_var = Vec::Ones(dim);
  p.fc_weight = Vec::Zero(dim);
  return p;
}

void EdgeScorerParams::Validate() const {
  const auto d = fc_weight.size();
  if (d < 1) throw Error("edge scorer params: empty fc_weight");
  if (bn_gamma.size() != d || bn_beta.size() != d || bn_mean.size() != d ||
      bn_var.size() != d) {
    throw Error("edge scorer params: vector lengths disagree");
  }
  if (!(bn_eps > 0)) throw Error("edge scorer params: bn_eps must be > 0");
  if ((bn_var.array() < 0).any()) {
    throw Error("edge scorer params: negative bn_var component");
  }
  if (!bn_gamma.allFinite() || !bn_beta.allFinite() || !bn_mean.allFinite() ||
      !bn_var.allFinite() || !fc_weight.allFinite() || !std::isfinite(bn_eps) ||
      !std::isfinite(fc_bias) || !std::isfinite(alpha)) {
    throw Error("edge scorer params: non-finite value");
  }
}

EdgeMode ParseEdgeMode(const std::string& text) {
  if (text == "trained") return EdgeMode::kTrained;
  if (text == "cosine") return EdgeMode::kCosine;
  throw Error("unknown edge mode '" + text + "' (expected trained|cosine)");
}

std::string ToString(EdgeMode mode) {
  return mode == EdgeMode::kTrained ? "trained" : "cosine";
}

double VertexScore(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw Error("vertex score: dimension mismatch (" +
                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                ")");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw Error("vertex score: cosine undefined for a zero-norm vector");
  }
  return a.dot(b) / (na * nb);
}

Vec EdgeFeature(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw Error("edge feature: dimension mismatch");
  return (a - b).array().square().matrix();
}

double EdgeScore(const Vec& a, const Vec& b, const EdgeScorerParams& params,
                 const std::optional<BatchStats>& batch_stats) {
  if (a.size() != params.dim() || b.size() != params.dim()) {
    throw Error("edge score: dimension mismatch with scorer params (" +
                std::to_string(a.size()) + "/" + std::to_string(b.size()) +
                " vs " + std::to_string(params.dim()) + ")");
  }
  const Vec& mean = batch_stats ? batch_stats->mean : params.bn_mean;
  const Vec& var = batch_stats ? batch_stats->var : params.bn_var;
  double u = params.fc_bias;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    const double x = diff * diff;
    const double xhat = (x - mean[k]) / std::sqrt(var[k] + params.bn_eps);
    u += params.fc_weight[k] * (params.bn_gamma[k] * xhat + params.bn_beta[k]);
  }
  return Sigmoid(u);
}

double PairEdgeScore(const Vec& a, const Vec& b, EdgeMode mode,
                     const EdgeScorerParams* params) {
  if (mode == EdgeMode::kCosine) return VertexScore(a, b);
  if (params == nullptr) {
    throw Error("trained edge mode requires edge scorer parameters");
  }
  return EdgeScore(a, b, *params);
}

Mat EdgeMatrix(const std::vector<Vec>& vectors, EdgeMode mode,
               const EdgeScorerParams* params) {
  const auto n = static_cast<Eigen::Index>(vectors.size());
  if (n < 1) throw Error("edge matrix: no vectors");
  if (mode == EdgeMode::kTrained && params == nullptr) {
    throw Error("trained edge mode requires edge scorer parameters");
  }
  Mat s = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = PairEdgeScore(vectors[i], vectors[j], mode, params);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

void SaveEdgeScorerParams(const EdgeScorerParams& params,
                          const std::filesystem::path& stem) {
  params.Validate();
  const EmbeddingPaths paths = ResolveEmbeddingPaths(stem);
  std::vector<float> data;
  for (const Vec* v : {&params.bn_gamma, &params.bn_beta, &params.bn_mean,
                       &params.bn_var, &params.fc_weight}) {
    for (Eigen::Index k = 0; k < v->size(); ++k) {
      data.push_back(static_cast<float>((*v)[k]));
    }
  }
  WriteF32(data, paths.data);
  WriteManifest({{"kind", "edge_scorer"},
                 {"dim", std::to_string(params.dim())},
                 {"dtype", "f32le"},
                 {"layout", kParamLayout},
                 {"bn_eps", FormatDouble(params.bn_eps)},
                 {"fc_bias", FormatDouble(params.fc_bias)},
                 {"alpha", FormatDouble(params.alpha)}},
                paths.manifest);
}

EdgeScorerParams LoadEdgeScorerParams(const std::filesystem::path& stem) {
  const EmbeddingPaths paths = ResolveEmbeddingPaths(stem);
  const Manifest m = ReadManifest(paths.manifest);
  auto it = m.find("dtype");
  if (it == m.end() || it->second != "f32le") {
    throw Error(paths.manifest.string() + ": dtype must be f32le");
  }
  it = m.find("layout");
  if (it == m.end() || it->second != kParamLayout) {
    throw Error(paths.manifest.string() + ": unexpected parameter layout");
  }
  const double dim_d = ManifestDouble(m, "dim", paths.manifest);
  const int dim = static_cast<int>(dim_d);
  if (dim < 1 || dim != dim_d) {
    throw Error(paths.manifest.string() + ": bad dim");
  }
  const std::vector<float> data = ReadF32(paths.data);
  if (data.size() != static_cast<size_t>(5 * dim)) {
    throw Error(paths.data.string() + ": expected " + std::to_string(5 * dim) +
                " values, found " + std::to_string(data.size()));
  }
  EdgeScorerParams p;
  Vec* blocks[] = {&p.bn_gamma, &p.bn_beta, &p.bn_mean, &p.bn_var,
                   &p.fc_weight};
  for (int b = 0; b < 5; ++b) {
    blocks[b]->resize(dim);
    for (int k = 0; k < dim; ++k) (*blocks[b])[k] = data[b * dim + k];
  }
  p.bn_eps = ManifestDouble(m, "bn_eps", paths.manifest);
  p.fc_bias = ManifestDouble(m, "fc_bias", paths.manifest);
  p.alpha = ManifestDouble(m, "alpha", paths.manifest);
  p.Validate();
  return p;
}

}  // namespace asg
