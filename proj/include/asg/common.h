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

#ifndef ASG_COMMON_H_
#define ASG_COMMON_H_

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace asg {

// All in-memory arithmetic is double precision; float32 only exists on disk.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using BoolMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Raised for malformed input data, invalid parameters and numerical
// failures. The CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A "keep the k largest" selector where k may be unbounded.
class TopK {
 public:
  TopK() = default;
  static TopK All() { return TopK(); }
  static TopK Of(int k) {
    if (k < 1) throw Error("top_k must be >= 1, got " + std::to_string(k));
    TopK t;
    t.k_ = k;
    return t;
  }
  // Accepts "all" or a positive integer.
  static TopK Parse(const std::string& text);

  bool all() const { return !k_.has_value(); }
  int value() const { return k_.value(); }
  // Number of survivors out of `available` candidates.
  int Clamp(int available) const {
    return all() ? available : std::min(*k_, available);
  }
  std::string ToString() const { return all() ? "all" : std::to_string(*k_); }

  friend bool operator==(const TopK&, const TopK&) = default;

 private:
  std::optional<int> k_;
};

}  // namespace asg

#endif  // ASG_COMMON_H_
