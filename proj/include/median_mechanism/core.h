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

// Domain, database, predicate and parameter types shared by every mechanism.

#ifndef MEDIAN_MECHANISM_CORE_H_
#define MEDIAN_MECHANISM_CORE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace median_mechanism {

// A finite universe X of indexed elements, optionally labelled.
class Domain {
 public:
  // Labels, when given, must be unique and exactly `size` of them.
  static absl::StatusOr<Domain> Create(size_t size,
                                       std::vector<std::string> labels = {});

  size_t size() const { return size_; }
  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Domain(size_t size, std::vector<std::string> labels)
      : size_(size), labels_(std::move(labels)) {}

  size_t size_;
  std::vector<std::string> labels_;
};

// A size-n multiset over the domain, stored as a count histogram. Two
// databases are neighbors when one unit of count moves between elements.
class Database {
 public:
  static absl::StatusOr<Database> FromCounts(std::vector<int64_t> counts);

  size_t domain_size() const { return counts_.size(); }
  // Number of elements n.
  int64_t size() const { return size_; }
  int64_t count(size_t j) const { return counts_[j]; }
  const std::vector<int64_t>& counts() const { return counts_; }

  friend bool operator==(const Database&, const Database&) = default;

 private:
  Database(std::vector<int64_t> counts, int64_t size)
      : counts_(std::move(counts)), size_(size) {}

  std::vector<int64_t> counts_;
  int64_t size_;
};

// A boolean function over the domain, stored as an |X|-length indicator.
class Predicate {
 public:
  // Entries must be 0 or 1.
  static absl::StatusOr<Predicate> FromIndicator(std::vector<uint8_t> bits);
  // Parses a string of '0'/'1' characters, element 0 first.
  static absl::StatusOr<Predicate> FromBitString(absl::string_view bits);
  static Predicate AllOnes(size_t domain_size);
  static Predicate AllZeros(size_t domain_size);
  static Predicate Singleton(size_t domain_size, size_t element);

  size_t domain_size() const { return bits_.size(); }
  bool Contains(size_t j) const { return bits_[j] != 0; }
  const std::vector<uint8_t>& indicator() const { return bits_; }
  size_t popcount() const;
  std::string ToBitString() const;

  friend bool operator==(const Predicate&, const Predicate&) = default;

 private:
  explicit Predicate(std::vector<uint8_t> bits) : bits_(std::move(bits)) {}

  std::vector<uint8_t> bits_;
};

// Fraction of the elements of `db` that satisfy `f`. The satisfied count is
// summed exactly in integers, so the result is the correctly rounded ratio.
absl::StatusOr<double> EvaluateQuery(const Predicate& f, const Database& db);

// Sensitivity of any non-trivial predicate query on size-n databases: 1/n.
// Requires n >= 1.
double QuerySensitivity(int64_t n);

// Multipliers in the parameter formulas. The defaults are the published
// analysis constants; the scaled mode lets desk-scale runs shrink them.
struct ParamConstants {
  double c_m = 160000.0;
  double c_alpha_denom = 720.0;
  double c_gamma = 4.0;

  static ParamConstants Published() { return ParamConstants{}; }
};

enum class ParamMode { kPaperExact, kScaled };

struct MechanismParams {
  double alpha = 0;  // privacy parameter
  double eps = 0;    // accuracy parameter
  int64_t k = 0;     // query budget
  int64_t n = 0;     // database size
  size_t domain_size = 0;

  int64_t m = 0;             // size of the consistent databases
  double alpha_prime = 0;    // per-step privacy scale
  double gamma = 0;          // threshold grid spacing
  ParamConstants constants;
  ParamMode mode = ParamMode::kPaperExact;
  bool m_overridden = false;

  // Smallest n covered by the usefulness guarantee for these parameters,
  // and whether `n` meets it.
  double n_lower_bound = 0;
  bool n_bound_holds = false;
};

// ceil(c_m * ln k * ln(1/eps) / eps^2), clamped below at 1. Taking ln k
// directly lets callers evaluate non-integer budgets.
int64_t ConsistentDatabaseSize(double c_m, double log_k, double eps);

// alpha / (c_alpha_denom * m * ln|X|).
double PerStepPrivacy(double alpha, double c_alpha_denom, int64_t m,
                      size_t domain_size);

// (c_gamma / (alpha' * eps * n)) * ln(2k / alpha).
double ThresholdGap(double c_gamma, double alpha_prime, double eps, int64_t n,
                    int64_t k, double alpha);

// 30 * ln(2k / alpha) * log2(k) / (alpha' * eps).
double DatabaseSizeLowerBound(double alpha, double alpha_prime, double eps,
                              int64_t k);

// Requires alpha, eps in (0, 1], k >= 2, n >= 1 and |X| >= 2. In paper-exact
// mode the constants must be the published ones and a violated n bound is an
// error; in scaled mode it is only reported. `m_override` (scaled mode only)
// replaces the derived m before alpha' and gamma are computed.
absl::StatusOr<MechanismParams> DeriveParams(double alpha, double eps,
                                             int64_t k, int64_t n,
                                             size_t domain_size,
                                             const ParamConstants& constants,
                                             ParamMode mode,
                                             int64_t m_override = 0);

absl::string_view ParamModeName(ParamMode mode);
absl::StatusOr<ParamMode> ParseParamMode(absl::string_view name);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_CORE_H_
