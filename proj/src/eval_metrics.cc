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

#include "asg/eval_metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace asg {

ScoredTrials SplitByLabel(const ScoredTrialList& scored) {
  ScoredTrials out;
  for (const auto& s : scored) {
    (s.trial.target ? out.target_scores : out.nontarget_scores)
        .push_back(s.score);
  }
  return out;
}

std::vector<DetPoint> DetPoints(const ScoredTrials& trials) {
  const auto& tar = trials.target_scores;
  const auto& non = trials.nontarget_scores;
  if (tar.empty() && non.empty()) throw Error("no scores to evaluate");
  // (score, is_target) sorted ascending.
  std::vector<std::pair<double, bool>> all;
  all.reserve(tar.size() + non.size());
  for (double s : tar) all.emplace_back(s, true);
  for (double s : non) all.emplace_back(s, false);
  for (const auto& [s, t] : all) {
    if (!std::isfinite(s)) throw Error("non-finite score");
  }
  std::sort(all.begin(), all.end());

  const double nt = static_cast<double>(tar.size());
  const double nn = static_cast<double>(non.size());
  auto rate = [](size_t count, double total) {
    return total > 0 ? static_cast<double>(count) / total : 0.0;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<DetPoint> points;
  // Threshold -inf accepts everything.
  size_t tar_below = 0;
  size_t non_below = 0;
  points.push_back({rate(non.size(), nn), 0.0, -inf});
  size_t i = 0;
  while (i < all.size()) {
    const double value = all[i].first;
    while (i < all.size() && all[i].first == value) {
      (all[i].second ? tar_below : non_below) += 1;
      ++i;
    }
    const double threshold =
        i < all.size() ? value + 0.5 * (all[i].first - value) : inf;
    points.push_back({rate(non.size() - non_below, nn), rate(tar_below, nt),
                      threshold});
  }
  return points;
}

EerResult ComputeEer(const ScoredTrials& trials) {
  if (trials.target_scores.empty() || trials.nontarget_scores.empty()) {
    throw Error("EER needs both target and nontarget scores");
  }
  const std::vector<DetPoint> points = DetPoints(trials);
  // FAR - FRR starts at 1 and ends at -1; find the first sign change.
  for (size_t k = 0; k < points.size(); ++k) {
    const DetPoint& p = points[k];
    const double d = p.far - p.frr;
    if (d == 0.0) return {p.far, p.threshold};
    if (d < 0.0) {
      const DetPoint& prev = points[k - 1];
      const double d_prev = prev.far - prev.frr;
      const double x = d_prev / (d_prev - d);
      const double eer = prev.far + x * (p.far - prev.far);
      const double threshold =
          std::abs(d_prev) <= std::abs(d) ? prev.threshold : p.threshold;
      return {eer, threshold};
    }
  }
  throw Error("EER sweep did not cross");  // unreachable: last point has d=-1
}

}  // namespace asg
