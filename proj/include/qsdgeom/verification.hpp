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

#ifndef QSDGEOM_VERIFICATION_HPP
#define QSDGEOM_VERIFICATION_HPP

#include <string>
#include <vector>

namespace qsd {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast oracle-equivalence and invariant checks (a few seconds). The full
/// suites live in the test tree; this is the subset the CLI can run on an
/// installed binary.
std::vector<CheckResult> run_verification(unsigned threads = 0);

}  // namespace qsd

#endif  // QSDGEOM_VERIFICATION_HPP
