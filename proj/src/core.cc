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

#include "median_mechanism/core.h"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"

namespace median_mechanism {

absl::StatusOr<Domain> Domain::Create(size_t size,
                                      std::vector<std::string> labels) {
  if (size < 1) {
    return absl::InvalidArgumentError("domain size must be at least 1");
  }
  if (!labels.empty()) {
    if (labels.size() != size) {
      return absl::InvalidArgumentError(
          absl::StrCat("expected ", size, " labels, got ", labels.size()));
    }
    std::set<std::string> seen;
    for (const std::string& label : labels) {
      if (!seen.insert(label).second) {
        return absl::InvalidArgumentError(
            absl::StrCat("duplicate domain label '", label, "'"));
      }
    }
  }
  return Domain(size, std::move(labels));
}

absl::StatusOr<Database> Database::FromCounts(std::vector<int64_t> counts) {
  if (counts.empty()) {
    return absl::InvalidArgumentError("database needs a nonempty domain");
  }
  int64_t total = 0;
  for (int64_t c : counts) {
    if (c < 0) {
      return absl::InvalidArgumentError("database counts must be nonnegative");
    }
    if (c > std::numeric_limits<int64_t>::max() - total) {
      return absl::InvalidArgumentError("database size overflows int64");
    }
    total += c;
  }
  if (total < 1) {
    return absl::InvalidArgumentError("database must hold at least one row");
  }
  return Database(std::move(counts), total);
}

absl::StatusOr<Predicate> Predicate::FromIndicator(std::vector<uint8_t> bits) {
  if (bits.empty()) {
    return absl::InvalidArgumentError("predicate needs a nonempty domain");
  }
  for (uint8_t b : bits) {
    if (b > 1) {
      return absl::InvalidArgumentError("predicate entries must be 0 or 1");
    }
  }
  return Predicate(std::move(bits));
}

absl::StatusOr<Predicate> Predicate::FromBitString(absl::string_view bits) {
  std::vector<uint8_t> out;
  out.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') {
      return absl::InvalidArgumentError(
          absl::StrCat("bad predicate character '", std::string(1, c), "'"));
    }
    out.push_back(c == '1' ? 1 : 0);
  }
  return FromIndicator(std::move(out));
}

Predicate Predicate::AllOnes(size_t domain_size) {
  return Predicate(std::vector<uint8_t>(domain_size, 1));
}

Predicate Predicate::AllZeros(size_t domain_size) {
  return Predicate(std::vector<uint8_t>(domain_size, 0));
}

Predicate Predicate::Singleton(size_t domain_size, size_t element) {
  std::vector<uint8_t> bits(domain_size, 0);
  if (element < domain_size) bits[element] = 1;
  return Predicate(std::move(bits));
}

size_t Predicate::popcount() const {
  return std::accumulate(bits_.begin(), bits_.end(), size_t{0});
}

std::string Predicate::ToBitString() const {
  std::string out;
  out.reserve(bits_.size());
  for (uint8_t b : bits_) out.push_back(b ? '1' : '0');
  return out;
}

absl::StatusOr<double> EvaluateQuery(const Predicate& f, const Database& db) {
  if (f.domain_size() != db.domain_size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("predicate covers ", f.domain_size(),
                     " elements but database covers ", db.domain_size()));
  }
  int64_t satisfied = 0;
  for (size_t j = 0; j < db.domain_size(); ++j) {
    if (f.Contains(j)) satisfied += db.count(j);
  }
  // Both operands are exact below 2^53, so the quotient is correctly rounded.
  return static_cast<double>(satisfied) / static_cast<double>(db.size());
}

double QuerySensitivity(int64_t n) { return 1.0 / static_cast<double>(n); }

int64_t ConsistentDatabaseSize(double c_m, double log_k, double eps) {
  const double raw = c_m * log_k * std::log(1.0 / eps) / (eps * eps);
  const double m = std::ceil(raw);
  if (!(m >= 1.0)) return 1;
  return static_cast<int64_t>(m);
}

double PerStepPrivacy(double alpha, double c_alpha_denom, int64_t m,
                      size_t domain_size) {
  return alpha / (c_alpha_denom * static_cast<double>(m) *
                  std::log(static_cast<double>(domain_size)));
}

double ThresholdGap(double c_gamma, double alpha_prime, double eps, int64_t n,
                    int64_t k, double alpha) {
  return c_gamma / (alpha_prime * eps * static_cast<double>(n)) *
         std::log(2.0 * static_cast<double>(k) / alpha);
}

double DatabaseSizeLowerBound(double alpha, double alpha_prime, double eps,
                              int64_t k) {
  const double kd = static_cast<double>(k);
  return 30.0 * std::log(2.0 * kd / alpha) * std::log2(kd) /
         (alpha_prime * eps);
}

namespace {

bool IsPublishedConstants(const ParamConstants& c) {
  const ParamConstants p = ParamConstants::Published();
  return c.c_m == p.c_m && c.c_alpha_denom == p.c_alpha_denom &&
         c.c_gamma == p.c_gamma;
}

}  // namespace

absl::StatusOr<MechanismParams> DeriveParams(double alpha, double eps,
                                             int64_t k, int64_t n,
                                             size_t domain_size,
                                             const ParamConstants& constants,
                                             ParamMode mode,
                                             int64_t m_override) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    return absl::InvalidArgumentError("alpha must lie in (0, 1]");
  }
  if (!(eps > 0.0 && eps <= 1.0)) {
    return absl::InvalidArgumentError("eps must lie in (0, 1]");
  }
  if (k < 2) return absl::InvalidArgumentError("k must be at least 2");
  if (n < 1) return absl::InvalidArgumentError("n must be at least 1");
  if (domain_size < 2) {
    return absl::InvalidArgumentError(
        "parameters need a domain of at least 2 elements (ln|X| > 0)");
  }
  if (!(constants.c_m > 0.0 && constants.c_alpha_denom > 0.0 &&
        constants.c_gamma > 0.0)) {
    return absl::InvalidArgumentError("constants must be positive");
  }
  if (m_override < 0) {
    return absl::InvalidArgumentError("m override must be nonnegative");
  }
  if (mode == ParamMode::kPaperExact) {
    if (!IsPublishedConstants(constants)) {
      return absl::InvalidArgumentError(
          "paper-exact mode requires the default constants; use scaled mode");
    }
    if (m_override != 0) {
      return absl::InvalidArgumentError(
          "m override is only available in scaled mode");
    }
  }

  MechanismParams p;
  p.alpha = alpha;
  p.eps = eps;
  p.k = k;
  p.n = n;
  p.domain_size = domain_size;
  p.constants = constants;
  p.mode = mode;
  if (m_override > 0) {
    p.m = m_override;
    p.m_overridden = true;
  } else {
    p.m = ConsistentDatabaseSize(constants.c_m,
                                 std::log(static_cast<double>(k)), eps);
  }
  p.alpha_prime = PerStepPrivacy(alpha, constants.c_alpha_denom, p.m,
                                 domain_size);
  p.gamma = ThresholdGap(constants.c_gamma, p.alpha_prime, eps, n, k, alpha);
  p.n_lower_bound = DatabaseSizeLowerBound(alpha, p.alpha_prime, eps, k);
  p.n_bound_holds = static_cast<double>(n) >= p.n_lower_bound;
  if (mode == ParamMode::kPaperExact && !p.n_bound_holds) {
    return absl::InvalidArgumentError(absl::StrCat(
        "parameters infeasible: n = ", n, " is below the usefulness bound ",
        p.n_lower_bound));
  }
  return p;
}

absl::string_view ParamModeName(ParamMode mode) {
  return mode == ParamMode::kPaperExact ? "paper-exact" : "scaled";
}

absl::StatusOr<ParamMode> ParseParamMode(absl::string_view name) {
  if (name == "paper-exact") return ParamMode::kPaperExact;
  if (name == "scaled") return ParamMode::kScaled;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown parameter mode '", std::string(name), "'"));
}

}  // namespace median_mechanism
