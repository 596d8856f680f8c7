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

// Grid-quadrature check of the volume condition that makes the sampled
// mechanism useful for a given database.

#ifndef MEDIAN_MECHANISM_GOOD_VOLUME_H_
#define MEDIAN_MECHANISM_GOOD_VOLUME_H_

#include <cstdint>
#include <span>

#include "absl/status/statusor.h"
#include "median_mechanism/core.h"

namespace median_mechanism {

inline constexpr int64_t kMaxGoodVolumeCells = 200'000'000;

struct GoodVolumeResult {
  // Fraction of the base set {F >= 0, sum(F) <= m} whose query values all
  // lie within eps / 100 of the database's.
  double ratio = 0;
  // |X|^(-2m).
  double threshold = 0;
  bool satisfied = false;
  int64_t resolution = 0;
};

// Counts grid-cell centers at `grid_resolution` cells per axis over [0, m]^d.
// Requires |X| <= 4 and cells no wider than the eps / 100 slab half-width;
// fails with InvalidArgument when the grid is too coarse or too large.
absl::StatusOr<GoodVolumeResult> GoodVolumeCheck(
    const Database& db, std::span<const Predicate> queries, double eps,
    int64_t m, int64_t grid_resolution);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_GOOD_VOLUME_H_
