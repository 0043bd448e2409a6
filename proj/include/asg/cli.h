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

#ifndef ASG_CLI_H_
#define ASG_CLI_H_

#include <iostream>
#include <string>
#include <vector>

namespace asg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `asg` tool. Subcommands: gen-synth, score, normalize,
// refine, train-ghosts, eval, dump-weights. Returns 0 on success, 1 on a data
// error and 2 on a usage error.
int RunCli(const std::vector<std::string>& args, std::ostream& out = std::cout,
           std::ostream& err = std::cerr);

}  // namespace asg

#endif  // ASG_CLI_H_
