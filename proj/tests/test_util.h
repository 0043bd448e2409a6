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

#ifndef ASG_TESTS_TEST_UTIL_H_
#define ASG_TESTS_TEST_UTIL_H_

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "asg/common.h"

namespace asg::testing {

// Fresh scratch directory under $ASG_TEST_TMP (or the system temp dir).
inline std::filesystem::path ScratchDir(const std::string& name) {
  const char* root = std::getenv("ASG_TEST_TMP");
  std::filesystem::path dir =
      (root ? std::filesystem::path(root)
            : std::filesystem::temp_directory_path() / "asg_test") /
      name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Vec RandomVec(int dim, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = g(rng);
  return v;
}

inline std::vector<Vec> RandomVecs(int count, int dim, std::mt19937_64& rng) {
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) out.push_back(RandomVec(dim, rng));
  return out;
}

// Symmetric matrix with uniform entries in [lo, hi] and a zero diagonal.
inline Mat RandomSymmetric(int n, std::mt19937_64& rng, double lo = -1.0,
                           double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat s = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) s(i, j) = s(j, i) = u(rng);
  }
  return s;
}

// Random row-stochastic matrix with a zero diagonal (n >= 2).
inline Mat RandomStochastic(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat w = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) sum += (w(i, j) = u(rng));
    }
    w.row(i) /= sum;
  }
  return w;
}

}  // namespace asg::testing

#endif  // ASG_TESTS_TEST_UTIL_H_
