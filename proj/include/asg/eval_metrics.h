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

#ifndef ASG_EVAL_METRICS_H_
#define ASG_EVAL_METRICS_H_

#include <vector>

#include "asg/embedding_store.h"

namespace asg {

struct ScoredTrials {
  std::vector<double> target_scores;
  std::vector<double> nontarget_scores;
};

ScoredTrials SplitByLabel(const ScoredTrialList& scored);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// One operating point: a trial is accepted when score >= threshold.
struct DetPoint {
  double far = 0.0;  // fraction of nontargets accepted
  double frr = 0.0;  // fraction of targets rejected
  double threshold = 0.0;
};

// Staircase of operating points at thresholds -inf, every midpoint between
// adjacent distinct scores, and +inf. FAR is non-increasing and FRR
// non-decreasing along the list. Throws if both lists are empty.
std::vector<DetPoint> DetPoints(const ScoredTrials& trials);

// Equal error rate, linearly interpolated between the two operating points
// that bracket the FAR = FRR crossing. `threshold` is that of the bracketing
// point with the smaller |FAR - FRR|. Throws if either list is empty or a
// score is not finite.
EerResult ComputeEer(const ScoredTrials& trials);

}  // namespace asg

#endif  // ASG_EVAL_METRICS_H_
