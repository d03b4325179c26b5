/* Copyright 2026 The ptsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PTSIM_CLI_H_
#define PTSIM_CLI_H_

#include <ostream>

namespace ptsim {

// Exit codes of the ptsim command line.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitIoError = 3;

// Entry point for `ptsim {verify|count-syncs|perf-table|trace}`. All output
// goes to the given streams so the CLI can be driven in-process by tests.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace ptsim

#endif  // PTSIM_CLI_H_
