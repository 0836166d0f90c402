/* Copyright 2026 The cprune Authors. All Rights Reserved.

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

// Command-line driver: gen, rank, profile, prune, eval and report.
//
// Every flag may also come from a JSON object in the file named by
// CPRUNE_CONFIG. Keys are flag names without the leading dashes; a nested
// object keyed by a subcommand name applies to that subcommand only and
// overrides top-level keys. Flags given on the command line win.

#ifndef CPRUNE_CLI_HPP_
#define CPRUNE_CLI_HPP_

#include <iostream>
#include <ostream>

namespace cprune::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,    // bad flags, config file or parameter ranges
  kExitData = 3,      // malformed or inconsistent model/trace/input files
  kExitInternal = 4,  // anything else
};

int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace cprune::cli

#endif  // CPRUNE_CLI_HPP_
