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

// Brute-force verifiers. Everything here is recomputed from the defining
// formulas with its own enumeration code; mechanism libraries never link it.

#ifndef MEDIAN_MECHANISM_ORACLE_H_
#define MEDIAN_MECHANISM_ORACLE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "median_mechanism/core.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/polytope.h"

namespace median_mechanism::oracle {

struct NeighborPair {
  Database d;
  Database d_prime;
};

// Every D' reached from D by moving one row to a different element.
std::vector<NeighborPair> EnumerateNeighbors(const Database& db);

// All count vectors of length `domain_size` summing to `total`.
std::vector<std::vector<int64_t>> EnumerateCountVectors(size_t domain_size,
                                                        int64_t total);

// Every predicate over the domain, indexed by the bitmask of its indicator.
std::vector<Predicate> AllPredicates(size_t domain_size);

// Mean of exp(-|f(D) - f(S)| / eps) over the members S (each of size m),
// from the formula with no shared helpers.
double ReferenceR(const std::vector<int64_t>& db, const Predicate& f,
                  const std::vector<std::vector<int64_t>>& members, int64_t m,
                  double eps);

// Alternative r implementation under test, e.g. the mechanism's own.
using RFunction = std::function<double(
    const Database& db, const Predicate& f,
    const std::vector<std::vector<int64_t>>& members, int64_t m, double eps)>;

struct SensitivityOptions {
  // Predicates to sweep; empty means all 2^|X|.
  std::vector<Predicate> predicates;
  // Random subsets of C_0 checked besides C_0 itself: half are filtered by a
  // random predicate window, half are Bernoulli(1/2) subsets.
  int random_subsets = 8;
  uint64_t seed = 1;
  // Defaults to ReferenceR.
  RFunction r_function;
};

struct SensitivityReport {
  size_t domain_size = 0;
  int64_t n = 0;
  int64_t m = 0;
  double eps = 0;
  double max_delta = 0;
  double bound = 0;  // 2 / (eps * n)
  int64_t comparisons = 0;
  int64_t sets_checked = 0;
  bool passed = true;
};

// Requires |X| <= 5, n <= 4, m <= 3.
absl::StatusOr<SensitivityReport> VerifyRSensitivity(
    size_t domain_size, int64_t n, int64_t m, double eps,
    const SensitivityOptions& options = {});

nlohmann::json ToJson(const SensitivityReport& report);

// Replays the consistent-set filter: sizes of C_0 and of the set after each
// listed (predicate, answer) hard update at width eps / 50.
struct HardUpdate {
  Predicate f;
  double a = 0;
};
std::vector<int64_t> ReplayConsistentSizes(
    size_t domain_size, int64_t m, double eps,
    std::span<const HardUpdate> updates);

struct PrivacyLossOptions {
  int bins = 200;
  int64_t trials = 1'000'000;
  uint64_t seed = 1;
  // Bins with fewer hits than this on either side are excluded and counted.
  int64_t min_bin_count = 100;
};

struct PrivacyLossReport {
  double estimate = 0;
  int bins_used = 0;
  int undersampled_bins = 0;
  int64_t trials = 0;
};

// Runs both mechanisms `trials` times, bins the pooled outputs at equal-mass
// quantiles, and returns the largest |ln(p_D / p_D')| over adequately sampled
// bins with add-one smoothing.
using ScalarMechanism = std::function<double(Rng& rng)>;
absl::StatusOr<PrivacyLossReport> PrivacyLossEstimate(
    const ScalarMechanism& on_d, const ScalarMechanism& on_d_prime,
    const PrivacyLossOptions& options = {});

nlohmann::json ToJson(const PrivacyLossReport& report);

struct VolumeEstimate {
  double volume = 0;
  // Cells straddling a face, relative to the counted cells: a bound on the
  // relative error of the cell-center rule.
  double relative_error_bound = 0;
  int64_t cells_inside = 0;
};

// Cell-center counting on a `resolution`^d grid over [0, m]^d. |X| <= 4.
absl::StatusOr<VolumeEstimate> QuadratureVolume(const ConsistentPolytope& p,
                                                int64_t resolution);

// Grid quadrature of the mean of g(F) over P (same grid as QuadratureVolume).
absl::StatusOr<double> QuadratureMean(
    const ConsistentPolytope& p, int64_t resolution,
    const std::function<double(std::span<const double>)>& g);

// sup |F_n(x) - cdf(x)| of the empirical distribution of `samples`.
double KolmogorovSmirnov(std::vector<double> samples,
                         const std::function<double(double)>& cdf);

}  // namespace median_mechanism::oracle

#endif  // MEDIAN_MECHANISM_ORACLE_H_
