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

#include "median_mechanism/core_json.h"

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "median_mechanism/core.h"

namespace median_mechanism {

using nlohmann::json;

namespace {

absl::StatusOr<size_t> ReadDomainSize(const json& doc) {
  if (!doc.is_object() || !doc.contains("domain_size") ||
      !doc["domain_size"].is_number_unsigned()) {
    return absl::InvalidArgumentError(
        "expected an object with an unsigned 'domain_size'");
  }
  return doc["domain_size"].get<size_t>();
}

}  // namespace

json DomainToJson(const Domain& domain) {
  json doc = {{"domain_size", domain.size()}};
  if (domain.has_labels()) doc["labels"] = domain.labels();
  return doc;
}

absl::StatusOr<Domain> DomainFromJson(const json& doc) {
  absl::StatusOr<size_t> size = ReadDomainSize(doc);
  if (!size.ok()) return size.status();
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    if (!doc["labels"].is_array()) {
      return absl::InvalidArgumentError("'labels' must be an array");
    }
    for (const json& l : doc["labels"]) {
      if (!l.is_string()) {
        return absl::InvalidArgumentError("labels must be strings");
      }
      labels.push_back(l.get<std::string>());
    }
  }
  return Domain::Create(*size, std::move(labels));
}

json DatabaseToJson(const Database& db, const Domain* domain) {
  json doc = {{"domain_size", db.domain_size()}, {"counts", db.counts()}};
  if (domain != nullptr && domain->has_labels()) {
    doc["labels"] = domain->labels();
  }
  return doc;
}

absl::StatusOr<Database> DatabaseFromJson(const json& doc) {
  absl::StatusOr<size_t> size = ReadDomainSize(doc);
  if (!size.ok()) return size.status();
  if (!doc.contains("counts") || !doc["counts"].is_array()) {
    return absl::InvalidArgumentError("database needs a 'counts' array");
  }
  std::vector<int64_t> counts;
  for (const json& c : doc["counts"]) {
    if (!c.is_number_integer()) {
      return absl::InvalidArgumentError("counts must be integers");
    }
    counts.push_back(c.get<int64_t>());
  }
  if (counts.size() != *size) {
    return absl::InvalidArgumentError(absl::StrCat(
        "'counts' has ", counts.size(), " entries, domain_size is ", *size));
  }
  return Database::FromCounts(std::move(counts));
}

json PredicateToJson(const Predicate& f) {
  std::vector<int> bits(f.indicator().begin(), f.indicator().end());
  return {{"domain_size", f.domain_size()}, {"indicator", bits}};
}

absl::StatusOr<Predicate> PredicateFromJson(const json& doc) {
  absl::StatusOr<size_t> size = ReadDomainSize(doc);
  if (!size.ok()) return size.status();
  if (!doc.contains("indicator") || !doc["indicator"].is_array()) {
    return absl::InvalidArgumentError("predicate needs an 'indicator' array");
  }
  std::vector<uint8_t> bits;
  for (const json& b : doc["indicator"]) {
    if (b.is_boolean()) {
      bits.push_back(b.get<bool>() ? 1 : 0);
    } else if (b.is_number_integer()) {
      int64_t v = b.get<int64_t>();
      if (v != 0 && v != 1) {
        return absl::InvalidArgumentError("indicator entries must be 0 or 1");
      }
      bits.push_back(static_cast<uint8_t>(v));
    } else {
      return absl::InvalidArgumentError("indicator entries must be 0 or 1");
    }
  }
  if (bits.size() != *size) {
    return absl::InvalidArgumentError(absl::StrCat(
        "'indicator' has ", bits.size(), " entries, domain_size is ", *size));
  }
  return Predicate::FromIndicator(std::move(bits));
}

json ParamsToJson(const MechanismParams& p) {
  return {
      {"alpha", p.alpha},
      {"eps", p.eps},
      {"k", p.k},
      {"n", p.n},
      {"domain_size", p.domain_size},
      {"m", p.m},
      {"m_overridden", p.m_overridden},
      {"alpha_prime", p.alpha_prime},
      {"gamma", p.gamma},
      {"constants",
       {{"c_m", p.constants.c_m},
        {"c_alpha_denom", p.constants.c_alpha_denom},
        {"c_gamma", p.constants.c_gamma}}},
      {"mode", std::string(ParamModeName(p.mode))},
      {"n_lower_bound", p.n_lower_bound},
      {"n_bound_holds", p.n_bound_holds},
  };
}

}  // namespace median_mechanism
