// Copyright 2026 The Median Mechanism Authors
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

// Oracle-backed verification suites reachable from `mmcli verify`.

#ifndef MEDIAN_MECHANISM_TOOLS_VERIFY_SUITES_H_
#define MEDIAN_MECHANISM_TOOLS_VERIFY_SUITES_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace median_mechanism {

struct SuiteResult {
  std::string name;
  bool passed = false;
  nlohmann::json details;
};

std::vector<std::string> SuiteNames();

// Runs one suite, or every suite for "all".
absl::StatusOr<std::vector<SuiteResult>> RunVerifySuite(
    const std::string& name, uint64_t seed);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_TOOLS_VERIFY_SUITES_H_
