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

#include "median_mechanism/good_volume.h"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "median_mechanism/core.h"

namespace median_mechanism {

absl::StatusOr<GoodVolumeResult> GoodVolumeCheck(
    const Database& db, std::span<const Predicate> queries, double eps,
    int64_t m, int64_t grid_resolution) {
  const size_t d = db.domain_size();
  if (d > 4) {
    return absl::InvalidArgumentError(
        "grid quadrature is limited to domains of at most 4 elements");
  }
  if (!(eps > 0.0)) return absl::InvalidArgumentError("eps must be positive");
  if (m < 1) return absl::InvalidArgumentError("m must be at least 1");
  if (grid_resolution < 1) {
    return absl::InvalidArgumentError("grid resolution must be positive");
  }
  const double tolerance = eps / 100.0;
  // Good-set slabs have width 2 * m * tolerance in count units; a cell wider
  // than half of that cannot resolve them.
  const double cell = static_cast<double>(m) /
                      static_cast<double>(grid_resolution);
  if (!queries.empty() && tolerance < 1.0 &&
      cell > static_cast<double>(m) * tolerance) {
    return absl::InvalidArgumentError(absl::StrCat(
        "grid too coarse: need at least ", std::ceil(1.0 / tolerance),
        " cells per axis, got ", grid_resolution));
  }
  const double cells = std::pow(static_cast<double>(grid_resolution),
                                static_cast<double>(d));
  if (cells > static_cast<double>(kMaxGoodVolumeCells)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "grid of ", cells, " cells exceeds the limit of ",
        kMaxGoodVolumeCells));
  }

  std::vector<double> truths;
  for (const Predicate& f : queries) {
    absl::StatusOr<double> t = EvaluateQuery(f, db);
    if (!t.ok()) return t.status();
    truths.push_back(*t);
  }
  const double md = static_cast<double>(m);
  std::vector<int64_t> index(d, 0);
  std::vector<double> point(d);
  int64_t base = 0;
  int64_t good = 0;
  const int64_t total = static_cast<int64_t>(cells);
  for (int64_t c = 0; c < total; ++c) {
    double sum = 0.0;
    for (size_t j = 0; j < d; ++j) {
      point[j] = (static_cast<double>(index[j]) + 0.5) * cell;
      sum += point[j];
    }
    if (sum <= md) {
      ++base;
      bool inside = true;
      for (size_t q = 0; q < queries.size() && inside; ++q) {
        double s = 0.0;
        for (size_t j = 0; j < d; ++j) {
          if (queries[q].Contains(j)) s += point[j];
        }
        inside = std::abs(s / md - truths[q]) <= tolerance;
      }
      if (inside) ++good;
    }
    for (size_t j = 0; j < d; ++j) {
      if (++index[j] < grid_resolution) break;
      index[j] = 0;
    }
  }
  GoodVolumeResult out;
  out.resolution = grid_resolution;
  out.ratio = base > 0 ? static_cast<double>(good) / static_cast<double>(base)
                       : 0.0;
  out.threshold = std::pow(static_cast<double>(d), -2.0 * md);
  out.satisfied = out.ratio >= out.threshold;
  return out;
}

}  // namespace median_mechanism
