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

// JSON encodings of the core types. Documents carry `domain_size`, optional
// `labels`, and either `counts` (databases) or `indicator` (predicates).

#ifndef MEDIAN_MECHANISM_CORE_JSON_H_
#define MEDIAN_MECHANISM_CORE_JSON_H_

#include "absl/status/statusor.h"
#include "json.hpp"
#include "median_mechanism/core.h"

namespace median_mechanism {

nlohmann::json DomainToJson(const Domain& domain);
absl::StatusOr<Domain> DomainFromJson(const nlohmann::json& doc);

// `domain` supplies optional labels for the output document.
nlohmann::json DatabaseToJson(const Database& db,
                              const Domain* domain = nullptr);
absl::StatusOr<Database> DatabaseFromJson(const nlohmann::json& doc);

nlohmann::json PredicateToJson(const Predicate& f);
absl::StatusOr<Predicate> PredicateFromJson(const nlohmann::json& doc);

nlohmann::json ParamsToJson(const MechanismParams& params);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_CORE_JSON_H_
