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

#include "median_mechanism/oracle.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "median_mechanism/core.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/polytope.h"

namespace median_mechanism::oracle {
namespace {

void FillCountVectors(size_t position, int64_t remaining,
                      std::vector<int64_t>& current,
                      std::vector<std::vector<int64_t>>& out) {
  if (position + 1 == current.size()) {
    current[position] = remaining;
    out.push_back(current);
    return;
  }
  for (int64_t c = 0; c <= remaining; ++c) {
    current[position] = c;
    FillCountVectors(position + 1, remaining - c, current, out);
  }
}

int64_t Satisfied(const std::vector<int64_t>& counts, const Predicate& f) {
  int64_t s = 0;
  for (size_t j = 0; j < counts.size(); ++j) {
    if (f.indicator()[j] == 1) s += counts[j];
  }
  return s;
}

int64_t Total(const std::vector<int64_t>& counts) {
  int64_t s = 0;
  for (int64_t c : counts) s += c;
  return s;
}

}  // namespace

std::vector<NeighborPair> EnumerateNeighbors(const Database& db) {
  std::vector<NeighborPair> out;
  const size_t d = db.domain_size();
  for (size_t from = 0; from < d; ++from) {
    if (db.count(from) == 0) continue;
    for (size_t to = 0; to < d; ++to) {
      if (to == from) continue;
      std::vector<int64_t> counts = db.counts();
      --counts[from];
      ++counts[to];
      out.push_back({db, *Database::FromCounts(std::move(counts))});
    }
  }
  return out;
}

std::vector<std::vector<int64_t>> EnumerateCountVectors(size_t domain_size,
                                                        int64_t total) {
  std::vector<std::vector<int64_t>> out;
  if (domain_size == 0 || total < 0) return out;
  std::vector<int64_t> current(domain_size, 0);
  FillCountVectors(0, total, current, out);
  return out;
}

std::vector<Predicate> AllPredicates(size_t domain_size) {
  std::vector<Predicate> out;
  for (uint64_t mask = 0; mask < (uint64_t{1} << domain_size); ++mask) {
    std::vector<uint8_t> bits(domain_size);
    for (size_t j = 0; j < domain_size; ++j) bits[j] = (mask >> j) & 1;
    out.push_back(*Predicate::FromIndicator(std::move(bits)));
  }
  return out;
}

double ReferenceR(const std::vector<int64_t>& db, const Predicate& f,
                  const std::vector<std::vector<int64_t>>& members, int64_t m,
                  double eps) {
  const double fd = static_cast<double>(Satisfied(db, f)) /
                    static_cast<double>(Total(db));
  double sum = 0.0;
  for (const std::vector<int64_t>& s : members) {
    const double fs =
        static_cast<double>(Satisfied(s, f)) / static_cast<double>(m);
    sum += std::exp(-std::abs(fd - fs) / eps);
  }
  return sum / static_cast<double>(members.size());
}

absl::StatusOr<SensitivityReport> VerifyRSensitivity(
    size_t domain_size, int64_t n, int64_t m, double eps,
    const SensitivityOptions& options) {
  if (domain_size < 1 || domain_size > 5 || n < 1 || n > 4 || m < 1 ||
      m > 3) {
    return absl::InvalidArgumentError(absl::StrCat(
        "exhaustive regime is |X| <= 5, n <= 4, m <= 3; got |X| = ",
        domain_size, ", n = ", n, ", m = ", m));
  }
  if (!(eps > 0.0)) return absl::InvalidArgumentError("eps must be positive");
  const std::vector<Predicate> predicates = options.predicates.empty()
                                                ? AllPredicates(domain_size)
                                                : options.predicates;
  for (const Predicate& f : predicates) {
    if (f.domain_size() != domain_size) {
      return absl::InvalidArgumentError("predicate has the wrong dimension");
    }
  }

  const std::vector<std::vector<int64_t>> c0 =
      EnumerateCountVectors(domain_size, m);
  std::vector<std::vector<std::vector<int64_t>>> sets = {c0};
  Rng rng(options.seed);
  for (int s = 0; s < options.random_subsets; ++s) {
    std::vector<std::vector<int64_t>> subset;
    if (s % 2 == 0) {
      // Window filter around a random member, like a hard update.
      std::vector<uint8_t> bits(domain_size);
      for (uint8_t& b : bits) b = rng() & 1;
      const Predicate g = *Predicate::FromIndicator(std::move(bits));
      const auto& anchor = c0[rng() % c0.size()];
      const double center =
          static_cast<double>(Satisfied(anchor, g)) / static_cast<double>(m);
      const double width = 0.5 * UniformOpen01(rng);
      for (const auto& member : c0) {
        const double v =
            static_cast<double>(Satisfied(member, g)) / static_cast<double>(m);
        if (std::abs(v - center) <= width) subset.push_back(member);
      }
    } else {
      for (const auto& member : c0) {
        if (rng() & 1) subset.push_back(member);
      }
      if (subset.empty()) subset.push_back(c0[rng() % c0.size()]);
    }
    sets.push_back(std::move(subset));
  }

  const std::vector<std::vector<int64_t>> dbs =
      EnumerateCountVectors(domain_size, n);
  std::map<std::vector<int64_t>, size_t> db_index;
  for (size_t i = 0; i < dbs.size(); ++i) db_index[dbs[i]] = i;

  SensitivityReport report;
  report.domain_size = domain_size;
  report.n = n;
  report.m = m;
  report.eps = eps;
  report.bound = 2.0 / (eps * static_cast<double>(n));
  report.sets_checked = static_cast<int64_t>(sets.size());
  for (const auto& set : sets) {
    // r for every (database, predicate) on this set.
    std::vector<double> r(dbs.size() * predicates.size());
    for (size_t i = 0; i < dbs.size(); ++i) {
      const Database db = *Database::FromCounts(dbs[i]);
      for (size_t q = 0; q < predicates.size(); ++q) {
        r[i * predicates.size() + q] =
            options.r_function
                ? options.r_function(db, predicates[q], set, m, eps)
                : ReferenceR(dbs[i], predicates[q], set, m, eps);
      }
    }
    for (size_t i = 0; i < dbs.size(); ++i) {
      const Database db = *Database::FromCounts(dbs[i]);
      for (const NeighborPair& pair : EnumerateNeighbors(db)) {
        const size_t k = db_index.at(pair.d_prime.counts());
        for (size_t q = 0; q < predicates.size(); ++q) {
          const double delta = std::abs(r[i * predicates.size() + q] -
                                        r[k * predicates.size() + q]);
          report.max_delta = std::max(report.max_delta, delta);
          ++report.comparisons;
        }
      }
    }
  }
  report.passed = report.max_delta <= report.bound + 1e-12;
  return report;
}

nlohmann::json ToJson(const SensitivityReport& report) {
  return {{"domain_size", report.domain_size},
          {"n", report.n},
          {"m", report.m},
          {"eps", report.eps},
          {"max_delta", report.max_delta},
          {"bound", report.bound},
          {"comparisons", report.comparisons},
          {"sets_checked", report.sets_checked},
          {"passed", report.passed}};
}

std::vector<int64_t> ReplayConsistentSizes(
    size_t domain_size, int64_t m, double eps,
    std::span<const HardUpdate> updates) {
  std::vector<std::vector<int64_t>> current =
      EnumerateCountVectors(domain_size, m);
  std::vector<int64_t> sizes = {static_cast<int64_t>(current.size())};
  for (const HardUpdate& u : updates) {
    std::vector<std::vector<int64_t>> kept;
    for (const auto& s : current) {
      const double v =
          static_cast<double>(Satisfied(s, u.f)) / static_cast<double>(m);
      if (std::abs(v - u.a) <= eps / 50.0) kept.push_back(s);
    }
    current = std::move(kept);
    sizes.push_back(static_cast<int64_t>(current.size()));
  }
  return sizes;
}

absl::StatusOr<PrivacyLossReport> PrivacyLossEstimate(
    const ScalarMechanism& on_d, const ScalarMechanism& on_d_prime,
    const PrivacyLossOptions& options) {
  if (options.bins < 1 || options.trials < 1) {
    return absl::InvalidArgumentError("need at least one bin and one trial");
  }
  const int64_t trials = options.trials;
  std::vector<double> a(trials);
  std::vector<double> b(trials);
  Rng rng_a(DeriveSeed(options.seed, 1));
  Rng rng_b(DeriveSeed(options.seed, 2));
  for (int64_t i = 0; i < trials; ++i) a[i] = on_d(rng_a);
  for (int64_t i = 0; i < trials; ++i) b[i] = on_d_prime(rng_b);

  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  std::vector<double> edges;
  for (int i = 1; i < options.bins; ++i) {
    edges.push_back(pooled[static_cast<size_t>(
        static_cast<double>(pooled.size()) * i / options.bins)]);
  }
  auto bin_of = [&edges](double x) {
    return static_cast<size_t>(std::upper_bound(edges.begin(), edges.end(), x) -
                               edges.begin());
  };
  std::vector<int64_t> count_a(options.bins, 0);
  std::vector<int64_t> count_b(options.bins, 0);
  for (double x : a) ++count_a[bin_of(x)];
  for (double x : b) ++count_b[bin_of(x)];

  PrivacyLossReport report;
  report.trials = trials;
  for (int i = 0; i < options.bins; ++i) {
    if (count_a[i] == 0 && count_b[i] == 0) continue;
    if (count_a[i] < options.min_bin_count ||
        count_b[i] < options.min_bin_count) {
      ++report.undersampled_bins;
      continue;
    }
    ++report.bins_used;
    const double loss = std::abs(std::log(
        (static_cast<double>(count_a[i]) + 1.0) /
        (static_cast<double>(count_b[i]) + 1.0)));
    report.estimate = std::max(report.estimate, loss);
  }
  return report;
}

nlohmann::json ToJson(const PrivacyLossReport& report) {
  return {{"estimate", report.estimate},
          {"bins_used", report.bins_used},
          {"undersampled_bins", report.undersampled_bins},
          {"trials", report.trials}};
}

namespace {

struct GridStats {
  int64_t inside = 0;
  int64_t boundary = 0;
  double sum = 0;
};

// Walks the grid, testing each center against the constraints rebuilt from
// the pair list.
absl::StatusOr<GridStats> WalkGrid(
    const ConsistentPolytope& p, int64_t resolution,
    const std::function<double(std::span<const double>)>* g) {
  const size_t d = p.domain_size();
  if (d > 4) {
    return absl::InvalidArgumentError(
        "grid quadrature is limited to at most 4 dimensions");
  }
  if (resolution < 1) {
    return absl::InvalidArgumentError("resolution must be positive");
  }
  const double m = p.m();
  const double cell = m / static_cast<double>(resolution);
  const double half = 0.5 * cell;
  int64_t total = 1;
  for (size_t j = 0; j < d; ++j) total *= resolution;
  std::vector<int64_t> index(d, 0);
  std::vector<double> x(d);
  GridStats stats;
  for (int64_t c = 0; c < total; ++c) {
    double sum = 0.0;
    for (size_t j = 0; j < d; ++j) {
      x[j] = (static_cast<double>(index[j]) + 0.5) * cell;
      sum += x[j];
    }
    bool inside = sum <= m;
    bool near = std::abs(sum - m) <= half * static_cast<double>(d);
    for (const HalfspacePair& pair : p.pairs()) {
      double s = 0.0;
      int64_t ones = 0;
      for (size_t j = 0; j < d; ++j) {
        if (pair.predicate.indicator()[j] == 1) {
          s += x[j];
          ++ones;
        }
      }
      const double upper = m * pair.center + pair.half_width;
      const double lower = m * pair.center - pair.half_width;
      inside = inside && s <= upper && s >= lower;
      const double reach = half * static_cast<double>(ones);
      near = near || std::abs(s - upper) <= reach ||
             std::abs(s - lower) <= reach;
    }
    if (inside) {
      ++stats.inside;
      if (g != nullptr) stats.sum += (*g)(x);
    }
    if (near) ++stats.boundary;
    for (size_t j = 0; j < d; ++j) {
      if (++index[j] < resolution) break;
      index[j] = 0;
    }
  }
  return stats;
}

}  // namespace

absl::StatusOr<VolumeEstimate> QuadratureVolume(const ConsistentPolytope& p,
                                                int64_t resolution) {
  absl::StatusOr<GridStats> stats = WalkGrid(p, resolution, nullptr);
  if (!stats.ok()) return stats.status();
  const double cell = p.m() / static_cast<double>(resolution);
  VolumeEstimate out;
  out.cells_inside = stats->inside;
  out.volume = static_cast<double>(stats->inside) *
               std::pow(cell, static_cast<double>(p.domain_size()));
  out.relative_error_bound =
      stats->inside > 0 ? static_cast<double>(stats->boundary) /
                              static_cast<double>(stats->inside)
                        : 1.0;
  return out;
}

absl::StatusOr<double> QuadratureMean(
    const ConsistentPolytope& p, int64_t resolution,
    const std::function<double(std::span<const double>)>& g) {
  absl::StatusOr<GridStats> stats = WalkGrid(p, resolution, &g);
  if (!stats.ok()) return stats.status();
  if (stats->inside == 0) {
    return absl::FailedPreconditionError("no grid cell lies inside");
  }
  return stats->sum / static_cast<double>(stats->inside);
}

double KolmogorovSmirnov(std::vector<double> samples,
                         const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    worst = std::max(worst, static_cast<double>(i + 1) / n - f);
    worst = std::max(worst, f - static_cast<double>(i) / n);
  }
  return worst;
}

}  // namespace median_mechanism::oracle
