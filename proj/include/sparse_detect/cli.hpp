// Copyright 2026 The sparse-detect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPARSE_DETECT_CLI_HPP_
#define SPARSE_DETECT_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace sparse_detect::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConfig = 3;

inline constexpr const char* kToolVersion = "0.1.0";

// Runs one command line (without the program name). Data goes to out, logs
// and diagnostics to err; `test` reads stdin from in when no file is given.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace sparse_detect::cli

#endif  // SPARSE_DETECT_CLI_HPP_
