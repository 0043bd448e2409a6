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

#include "asg/cli.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <thread>
#include <unordered_map>

#include "CLI11.hpp"
#include "asg/asg_engine.h"
#include "asg/edge_scorer.h"
#include "asg/embedding_store.h"
#include "asg/eval_metrics.h"
#include "asg/ghost_trainer.h"
#include "asg/score_norm.h"
#include "asg/synth_data.h"

namespace asg {

namespace {

// Runs fn(i) for i in [0, n) on `jobs` threads. Each index is handled by
// exactly one thread, so results written by index keep input order.
void ParallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn) {
  const size_t workers =
      std::max<size_t>(1, std::min<size_t>(static_cast<size_t>(jobs), n));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Reads a 3- or 4-column trial file; a score column, if present, is ignored.
TrialList LoadTrialsAnyFormat(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trial file " + path);
  std::string first;
  while (std::getline(in, first)) {
    if (first.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  std::istringstream is(first);
  std::string f;
  int fields = 0;
  while (is >> f) ++fields;
  if (fields == 4) {
    TrialList out;
    for (auto& s : LoadScoredTrials(path)) out.push_back(std::move(s.trial));
    return out;
  }
  return LoadTrials(path);
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct NormOptions {
  std::string norm = "none";
  std::string cohort;
  std::string snorm_top = "all";
  bool cohort_average = false;
};

void AddNormOptions(CLI::App* cmd, NormOptions* o) {
  cmd->add_option("--norm", o->norm, "Score normalization")
      ->check(CLI::IsMember({"none", "z", "t", "zt", "s"}));
  cmd->add_option("--cohort", o->cohort, "Cohort embedding stem");
  cmd->add_flag("--cohort-average", o->cohort_average,
               "Average the cohort per speaker first");
  cmd->add_option("--snorm-top", o->snorm_top,
                  "Adaptive s-norm cohort size (n or 'all')");
}

EmbeddingSet LoadCohort(const NormOptions& o) {
  EmbeddingSet cohort = LoadEmbeddings(o.cohort);
  return o.cohort_average ? SpeakerAverage(cohort) : cohort;
}

std::unique_ptr<CohortNormalizer> MakeNormalizer(const NormOptions& o) {
  if (o.norm == "none") return nullptr;
  if (o.cohort.empty()) throw Error("--norm " + o.norm + " needs --cohort");
  const EmbeddingSet cohort = LoadCohort(o);
  return std::make_unique<CohortNormalizer>(
      cohort.Vectors(), ParseNormMethod(o.norm, TopK::Parse(o.snorm_top)));
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Auxiliary speakers graph scoring back-end", "asg"};
  app.require_subcommand(1);

  // gen-synth
  SynthConfig synth;
  std::string synth_out, synth_trials;
  auto* gen = app.add_subcommand("gen-synth", "Generate synthetic embeddings");
  gen->add_option("--speakers", synth.num_speakers)->capture_default_str();
  gen->add_option("--utts", synth.utts_per_speaker)->capture_default_str();
  gen->add_option("--dim", synth.dim)->capture_default_str();
  gen->add_option("--within-std", synth.within_std)->capture_default_str();
  gen->add_option("--shift", synth.condition_shift)->capture_default_str();
  gen->add_option("--conditions", synth.num_conditions)->capture_default_str();
  gen->add_option("--seed", synth.seed)->capture_default_str();
  gen->add_option("--prefix", synth.id_prefix, "Speaker id prefix");
  gen->add_option("--out", synth_out, "Output embedding stem")->required();
  gen->add_option("--trials", synth_trials, "Output trial file");

  // score
  std::string emb_path, trials_path, out_path;
  int jobs = 1;
  auto* score = app.add_subcommand("score", "Raw cosine trial scores");
  score->add_option("--embeddings", emb_path)->required();
  score->add_option("--trials", trials_path)->required();
  score->add_option("--out", out_path)->required();
  score->add_option("--jobs", jobs)->check(CLI::PositiveNumber);

  // normalize
  NormOptions norm_opts;
  std::string scores_path;
  auto* normalize = app.add_subcommand("normalize", "Cohort score normalization");
  normalize->add_option("--embeddings", emb_path)->required();
  normalize->add_option("--scores", scores_path, "Scored trial file")
      ->required();
  normalize->add_option("--out", out_path)->required();
  AddNormOptions(normalize, &norm_opts);

  // refine
  AsgConfig asg;
  std::string aux_path, params_path, topk_text = "64", edge_mode = "cosine";
  bool aux_average = false;
  auto* refine = app.add_subcommand("refine", "Graph-refined trial scores");
  refine->add_option("--embeddings", emb_path)->required();
  refine->add_option("--trials", trials_path)->required();
  refine->add_option("--aux", aux_path, "Auxiliary embedding or ghost stem")
      ->required();
  refine->add_flag("--aux-average", aux_average,
                   "Average auxiliaries per speaker first");
  refine->add_option("--lambda", asg.lambda)->capture_default_str();
  refine->add_option("--iters", asg.iterations)->capture_default_str();
  refine->add_option("--topk", topk_text)->capture_default_str();
  refine->add_option("--alpha", asg.alpha, "Softmax scale (cosine edges)")
      ->capture_default_str();
  refine->add_flag("--self-edges", asg.self_edges);
  refine->add_option("--edge-mode", edge_mode)
      ->check(CLI::IsMember({"cosine", "trained"}))
      ->capture_default_str();
  refine->add_option("--params", params_path, "Edge scorer parameter stem");
  refine->add_option("--out", out_path)->required();
  refine->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  AddNormOptions(refine, &norm_opts);

  // train-ghosts
  TrainConfig train;
  int num_ghosts = 128;
  std::string ghosts_out, params_out, loss_csv, init_params;
  auto* train_cmd =
      app.add_subcommand("train-ghosts", "Train ghosts and the edge scorer");
  train_cmd->add_option("--embeddings", emb_path)->required();
  train_cmd->add_option("--num-ghosts", num_ghosts)->capture_default_str();
  train_cmd->add_option("--lr", train.learning_rate_graph)
      ->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs)->capture_default_str();
  train_cmd->add_option("--steps-per-epoch", train.steps_per_epoch)
      ->capture_default_str();
  train_cmd->add_option("--groups", train.groups_per_batch)
      ->capture_default_str();
  train_cmd->add_option("--lambda", train.lambda)->capture_default_str();
  train_cmd->add_option("--iters", train.iterations)->capture_default_str();
  train_cmd->add_option("--topk", topk_text, "Top-k during training")
      ->capture_default_str();
  train_cmd->add_flag("--self-edges", train.self_edges);
  train_cmd->add_flag("--cosine-schedule", train.cosine_schedule);
  train_cmd->add_option("--seed", train.seed)->capture_default_str();
  train_cmd->add_option("--init-params", init_params,
                        "Start from these edge scorer parameters");
  train_cmd->add_option("--out-ghosts", ghosts_out)->required();
  train_cmd->add_option("--out-params", params_out)->required();
  train_cmd->add_option("--loss-csv", loss_csv);

  // eval
  std::string det_csv;
  auto* eval = app.add_subcommand("eval", "Equal error rate of scored trials");
  eval->add_option("--scores", scores_path)->required();
  eval->add_option("--det-csv", det_csv, "Write DET points as CSV");

  // dump-weights
  int limit = 100;
  uint64_t seed = 0;
  auto* dump = app.add_subcommand("dump-weights",
                                  "Contribution weights over the auxiliaries");
  dump->add_option("--embeddings", emb_path, "Test embeddings")->required();
  dump->add_option("--aux", aux_path)->required();
  dump->add_option("--edge-mode", edge_mode)
      ->check(CLI::IsMember({"cosine", "trained"}))
      ->capture_default_str();
  dump->add_option("--params", params_path);
  dump->add_option("--alpha", asg.alpha)->capture_default_str();
  dump->add_option("--topk", topk_text)->capture_default_str();
  dump->add_option("--limit", limit, "Number of test embeddings sampled")
      ->capture_default_str();
  dump->add_option("--seed", seed)->capture_default_str();
  dump->add_option("--out", out_path)->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      auto [set, trials] = GenerateSpeakers(synth);
      SaveEmbeddings(set, synth_out);
      if (!synth_trials.empty()) SaveTrials(trials, synth_trials);
      out << "wrote " << set.size() << " embeddings (" << set.speakers().size()
          << " speakers), " << trials.size() << " trials\n";
    } else if (*score) {
      const EmbeddingSet set = LoadEmbeddings(emb_path);
      const TrialList trials = LoadTrialsAnyFormat(trials_path);
      CheckTrialsResolvable(trials, set);
      ScoredTrialList scored(trials.size());
      ParallelFor(trials.size(), jobs, [&](size_t i) {
        scored[i] = {trials[i], VertexScore(set.Find(trials[i].enroll).vector,
                                            set.Find(trials[i].test).vector)};
      });
      SaveScoredTrials(scored, out_path);
    } else if (*normalize) {
      const EmbeddingSet set = LoadEmbeddings(emb_path);
      const ScoredTrialList scored = LoadScoredTrials(scores_path);
      if (norm_opts.norm == "none") {
        SaveScoredTrials(scored, out_path);
      } else {
        if (norm_opts.cohort.empty()) {
          throw Error("--norm " + norm_opts.norm + " needs --cohort");
        }
        const EmbeddingSet cohort = LoadCohort(norm_opts);
        SaveScoredTrials(
            NormalizeScores(scored, set, cohort,
                            ParseNormMethod(norm_opts.norm,
                                            TopK::Parse(norm_opts.snorm_top))),
            out_path);
      }
    } else if (*refine) {
      const EmbeddingSet set = LoadEmbeddings(emb_path);
      const TrialList trials = LoadTrialsAnyFormat(trials_path);
      CheckTrialsResolvable(trials, set);
      EmbeddingSet aux = LoadEmbeddings(aux_path);
      if (aux_average) aux = SpeakerAverage(aux);
      asg.top_k = TopK::Parse(topk_text);
      asg.edge_mode = ParseEdgeMode(edge_mode);
      std::optional<EdgeScorerParams> params;
      if (!params_path.empty()) params = LoadEdgeScorerParams(params_path);
      if (asg.edge_mode == EdgeMode::kTrained && !params) {
        throw Error("--edge-mode trained needs --params");
      }
      const auto normalizer = MakeNormalizer(norm_opts);
      const AsgScorer scorer(aux.Vectors(), asg, params, normalizer.get());

      // Prepare each referenced utterance once.
      std::vector<std::string> ids;
      std::unordered_map<std::string, size_t> slot;
      for (const auto& t : trials) {
        for (const auto* id : {&t.enroll, &t.test}) {
          if (slot.emplace(*id, ids.size()).second) ids.push_back(*id);
        }
      }
      std::vector<AsgScorer::Segment> segments(ids.size());
      ParallelFor(ids.size(), jobs, [&](size_t i) {
        segments[i] = scorer.Prepare(set.Find(ids[i]).vector);
      });
      ScoredTrialList scored(trials.size());
      ParallelFor(trials.size(), jobs, [&](size_t i) {
        const auto& e = segments[slot.at(trials[i].enroll)];
        const auto& t = segments[slot.at(trials[i].test)];
        scored[i] = {trials[i], scorer.Score(std::span(&e, 1),
                                             std::span(&t, 1))};
      });
      SaveScoredTrials(scored, out_path);
    } else if (*train_cmd) {
      const EmbeddingSet set = LoadEmbeddings(emb_path);
      train.top_k = TopK::Parse(topk_text == "64" ? "all" : topk_text);
      EdgeScorerParams params = init_params.empty()
                                    ? EdgeScorerParams::Default(set.dim())
                                    : LoadEdgeScorerParams(init_params);
      GhostDictionary ghosts = InitGhosts(num_ghosts, set.dim(), train.seed);
      const TrainResult result =
          Train(set, std::move(ghosts), std::move(params), train);
      SaveEmbeddings(result.ghosts.ToEmbeddingSet(), ghosts_out);
      SaveEdgeScorerParams(result.params, params_out);
      if (!loss_csv.empty()) SaveLossHistory(result.loss_history, loss_csv);
      if (!result.loss_history.empty()) {
        out << "steps=" << result.loss_history.size()
            << " initial_loss=" << result.loss_history.front()
            << " final_loss=" << result.loss_history.back() << "\n";
      }
    } else if (*eval) {
      const ScoredTrials split = SplitByLabel(LoadScoredTrials(scores_path));
      const EerResult r = ComputeEer(split);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "EER(%%) = %.2f @ threshold %.6g\n",
                    100.0 * r.eer, r.threshold);
      out << buf;
      if (!det_csv.empty()) {
        std::ofstream csv(det_csv);
        if (!csv) throw Error("cannot write " + det_csv);
        csv << "far,frr,threshold\n";
        for (const auto& p : DetPoints(split)) {
          csv << FormatDouble(p.far) << ',' << FormatDouble(p.frr) << ','
              << FormatDouble(p.threshold) << '\n';
        }
      }
    } else if (*dump) {
      const EmbeddingSet set = LoadEmbeddings(emb_path);
      const EmbeddingSet aux = LoadEmbeddings(aux_path);
      asg.top_k = TopK::Parse(topk_text);
      asg.edge_mode = ParseEdgeMode(edge_mode);
      std::optional<EdgeScorerParams> params;
      if (!params_path.empty()) params = LoadEdgeScorerParams(params_path);
      if (asg.edge_mode == EdgeMode::kTrained && !params) {
        throw Error("--edge-mode trained needs --params");
      }
      if (limit < 1) throw Error("--limit must be >= 1");
      std::vector<size_t> pick(set.size());
      for (size_t i = 0; i < pick.size(); ++i) pick[i] = i;
      if (pick.size() > static_cast<size_t>(limit)) {
        std::mt19937_64 rng(seed);
        std::shuffle(pick.begin(), pick.end(), rng);
        pick.resize(limit);
        std::sort(pick.begin(), pick.end());
      }
      std::vector<Vec> tests;
      for (size_t i : pick) tests.push_back(set[i].vector);
      const AsgScorer scorer(aux.Vectors(), asg, params);
      const Mat w = scorer.ContributionWeights(tests);
      std::ofstream f(out_path);
      if (!f) throw Error("cannot write " + out_path);
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
          if (c) f << ' ';
          f << FormatDouble(w(r, c));
        }
        f << '\n';
      }
      if (!f) throw Error("write failed: " + out_path);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace asg
