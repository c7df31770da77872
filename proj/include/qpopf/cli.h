// Copyright 2026 The qpopf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: regions, train, audit, eval, sweep, budget, report.

#ifndef QPOPF_CLI_H_
#define QPOPF_CLI_H_

#include <ostream>

namespace qpopf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Default output directory when --out-dir is not given.
inline constexpr char kOutDirEnv[] = "QPOPF_OUT_DIR";

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace qpopf

#endif  // QPOPF_CLI_H_
