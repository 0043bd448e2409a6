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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "asg/asg_engine.h"
#include "asg/edge_scorer.h"
#include "asg/embedding_store.h"
#include "asg/eval_metrics.h"
#include "asg/ghost_trainer.h"
#include "asg/score_norm.h"
#include "asg/synth_data.h"

namespace py = pybind11;

namespace asg {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;

std::vector<Vec> Rows(const Eigen::Ref<const RowMat>& m) {
  std::vector<Vec> out;
  out.reserve(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m.row(i));
  return out;
}

RowMat Stack(const std::vector<Vec>& rows, int dim) {
  RowMat m(rows.size(), dim);
  for (size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i];
  return m;
}

TopK ToTopK(const std::optional<int>& k) {
  return k ? TopK::Of(*k) : TopK::All();
}

AsgConfig MakeConfig(double lambda, int iterations, std::optional<int> top_k,
                     bool self_edges, const std::string& edge_mode,
                     double alpha) {
  AsgConfig c;
  c.lambda = lambda;
  c.iterations = iterations;
  c.top_k = ToTopK(top_k);
  c.self_edges = self_edges;
  c.edge_mode = ParseEdgeMode(edge_mode);
  c.alpha = alpha;
  c.Validate();
  return c;
}

EmbeddingSet MakeSet(const std::vector<std::string>& ids,
                     const std::vector<std::string>& speakers,
                     const Eigen::Ref<const RowMat>& vectors) {
  if (ids.size() != static_cast<size_t>(vectors.rows()) ||
      speakers.size() != ids.size()) {
    throw Error("ids, speakers and vector rows must have equal length");
  }
  EmbeddingSet set(static_cast<int>(vectors.cols()));
  for (size_t i = 0; i < ids.size(); ++i) {
    set.Add({ids[i], speakers[i], vectors.row(i).transpose()});
  }
  return set;
}

py::tuple SetToTuple(const EmbeddingSet& set) {
  std::vector<std::string> ids, speakers;
  for (const auto& e : set.entries()) {
    ids.push_back(e.id);
    speakers.push_back(e.speaker);
  }
  return py::make_tuple(ids, speakers, Stack(set.Vectors(), set.dim()));
}

}  // namespace
}  // namespace asg

PYBIND11_MODULE(_asgscore, m) {
  using namespace asg;
  m.doc() = "Auxiliary speakers graph scoring";

  py::register_exception<Error>(m, "AsgError", PyExc_ValueError);

  py::class_<EdgeScorerParams>(m, "EdgeScorerParams")
      .def_static("default", &EdgeScorerParams::Default, py::arg("dim"))
      .def_static("load", [](const std::string& stem) {
        return LoadEdgeScorerParams(stem);
      })
      .def("save", [](const EdgeScorerParams& p, const std::string& stem) {
        SaveEdgeScorerParams(p, stem);
      })
      .def_readwrite("bn_gamma", &EdgeScorerParams::bn_gamma)
      .def_readwrite("bn_beta", &EdgeScorerParams::bn_beta)
      .def_readwrite("bn_mean", &EdgeScorerParams::bn_mean)
      .def_readwrite("bn_var", &EdgeScorerParams::bn_var)
      .def_readwrite("bn_eps", &EdgeScorerParams::bn_eps)
      .def_readwrite("fc_weight", &EdgeScorerParams::fc_weight)
      .def_readwrite("fc_bias", &EdgeScorerParams::fc_bias)
      .def_readwrite("alpha", &EdgeScorerParams::alpha)
      .def_property_readonly("dim", &EdgeScorerParams::dim);

  m.def("cosine", &VertexScore, py::arg("a"), py::arg("b"));
  m.def("edge_score",
        [](const Vec& a, const Vec& b, const EdgeScorerParams& p) {
          return EdgeScore(a, b, p);
        },
        py::arg("a"), py::arg("b"), py::arg("params"));

  m.def("weight_matrix",
        [](const Mat& s, double alpha, std::optional<int> top_k,
           bool self_edges) {
          return WeightMatrix(s, alpha, ToTopK(top_k), self_edges);
        },
        py::arg("edges"), py::arg("alpha") = 1.0, py::arg("top_k") = py::none(),
        py::arg("self_edges") = false);
  m.def("refine", &Refine, py::arg("y0"), py::arg("weights"),
        py::arg("lam"), py::arg("iterations"));
  m.def("fixed_point", &FixedPoint, py::arg("y0"), py::arg("weights"),
        py::arg("lam"));

  m.def("pair_score",
        [](const Eigen::Ref<const RowMat>& a, const Eigen::Ref<const RowMat>& b,
           const Eigen::Ref<const RowMat>& aux, double lam, int iterations,
           std::optional<int> top_k, bool self_edges,
           const std::string& edge_mode, double alpha,
           std::optional<EdgeScorerParams> params) {
          const AsgConfig c =
              MakeConfig(lam, iterations, top_k, self_edges, edge_mode, alpha);
          return PairScore(Rows(a), Rows(b), Rows(aux), c,
                           params ? &*params : nullptr);
        },
        py::arg("a"), py::arg("b"), py::arg("aux"), py::arg("lam") = 0.2,
        py::arg("iterations") = 1, py::arg("top_k") = 64,
        py::arg("self_edges") = false, py::arg("edge_mode") = "cosine",
        py::arg("alpha") = 1.0, py::arg("params") = py::none());

  m.def("contribution_weights",
        [](const Eigen::Ref<const RowMat>& tests,
           const Eigen::Ref<const RowMat>& aux, std::optional<int> top_k,
           const std::string& edge_mode, double alpha,
           std::optional<EdgeScorerParams> params) {
          const AsgConfig c =
              MakeConfig(0.2, 1, top_k, false, edge_mode, alpha);
          return ContributionWeights(Rows(tests), Rows(aux), c,
                                     params ? &*params : nullptr);
        },
        py::arg("tests"), py::arg("aux"), py::arg("top_k") = 64,
        py::arg("edge_mode") = "cosine", py::arg("alpha") = 1.0,
        py::arg("params") = py::none());

  m.def("eer",
        [](std::vector<double> targets, std::vector<double> nontargets) {
          const EerResult r = ComputeEer({std::move(targets),
                                          std::move(nontargets)});
          return py::make_tuple(r.eer, r.threshold);
        },
        py::arg("target_scores"), py::arg("nontarget_scores"),
        "Returns (eer, threshold).");

  m.def("cohort_normalize",
        [](const std::vector<double>& raw,
           const Eigen::Ref<const RowMat>& enroll,
           const Eigen::Ref<const RowMat>& test,
           const Eigen::Ref<const RowMat>& cohort, const std::string& method,
           std::optional<int> snorm_top) {
          if (enroll.rows() != static_cast<Eigen::Index>(raw.size()) ||
              test.rows() != enroll.rows()) {
            throw Error("raw, enroll and test must have equal length");
          }
          const CohortNormalizer norm(
              Rows(cohort), ParseNormMethod(method, ToTopK(snorm_top)));
          std::vector<double> out(raw.size());
          for (size_t i = 0; i < raw.size(); ++i) {
            out[i] = norm.Apply(raw[i], norm.Stats(enroll.row(i).transpose()),
                                norm.Stats(test.row(i).transpose()));
          }
          return out;
        },
        py::arg("raw"), py::arg("enroll"), py::arg("test"), py::arg("cohort"),
        py::arg("method"), py::arg("snorm_top") = py::none());

  m.def("generate_speakers",
        [](int speakers, int utts, int dim, double within_std, double shift,
           int conditions, uint64_t seed, const std::string& prefix) {
          SynthConfig c;
          c.num_speakers = speakers;
          c.utts_per_speaker = utts;
          c.dim = dim;
          c.within_std = within_std;
          c.condition_shift = shift;
          c.num_conditions = conditions;
          c.seed = seed;
          c.id_prefix = prefix;
          return SetToTuple(GenerateSpeakers(c).first);
        },
        py::arg("speakers") = 40, py::arg("utts") = 6, py::arg("dim") = 32,
        py::arg("within_std") = 0.25, py::arg("shift") = 0.35,
        py::arg("conditions") = 3, py::arg("seed") = 7,
        py::arg("prefix") = "",
        "Returns (ids, speakers, vectors).");

  m.def("load_embeddings",
        [](const std::string& stem) { return SetToTuple(LoadEmbeddings(stem)); },
        py::arg("stem"));
  m.def("save_embeddings",
        [](const std::string& stem, const std::vector<std::string>& ids,
           const std::vector<std::string>& speakers,
           const Eigen::Ref<const RowMat>& vectors) {
          SaveEmbeddings(MakeSet(ids, speakers, vectors), stem);
        },
        py::arg("stem"), py::arg("ids"), py::arg("speakers"),
        py::arg("vectors"));

  m.def("train_ghosts",
        [](const std::vector<std::string>& speakers,
           const Eigen::Ref<const RowMat>& vectors, int num_ghosts,
           double lr, int steps, int groups, double lam, int iterations,
           std::optional<int> top_k, bool self_edges, bool cosine_schedule,
           uint64_t seed) {
          std::vector<std::string> ids;
          for (size_t i = 0; i < speakers.size(); ++i) {
            ids.push_back("u" + std::to_string(i));
          }
          const EmbeddingSet set = MakeSet(ids, speakers, vectors);
          TrainConfig c;
          c.learning_rate_graph = lr;
          c.steps_per_epoch = steps;
          c.groups_per_batch = groups;
          c.lambda = lam;
          c.iterations = iterations;
          c.top_k = ToTopK(top_k);
          c.self_edges = self_edges;
          c.cosine_schedule = cosine_schedule;
          c.seed = seed;
          TrainResult r;
          {
            py::gil_scoped_release release;
            r = Train(set, InitGhosts(num_ghosts, set.dim(), seed),
                      EdgeScorerParams::Default(set.dim()), c);
          }
          return py::make_tuple(RowMat(r.ghosts.embeddings), r.params,
                                r.loss_history);
        },
        py::arg("speakers"), py::arg("vectors"), py::arg("num_ghosts") = 128,
        py::arg("lr") = 0.005, py::arg("steps") = 200, py::arg("groups") = 8,
        py::arg("lam") = 0.2, py::arg("iterations") = 1,
        py::arg("top_k") = py::none(), py::arg("self_edges") = false,
        py::arg("cosine_schedule") = false, py::arg("seed") = 0,
        "Returns (ghosts, params, loss_history).");
}
