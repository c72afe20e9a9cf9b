// Copyright 2026 The qsdgeom Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSDGEOM_CLI_HPP
#define QSDGEOM_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace qsd::cli {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;     // verification failure or runtime error
constexpr int kExitValidation = 2;  // bad flags or configuration

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// The library version string (git describe at build time).
const char *version();

}  // namespace qsd::cli

#endif  // QSDGEOM_CLI_HPP
