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

// The fractional consistent set: histograms F >= 0 with sum(F) <= m, cut by
// pairs of halfspaces around earlier hard answers.

#ifndef MEDIAN_MECHANISM_POLYTOPE_H_
#define MEDIAN_MECHANISM_POLYTOPE_H_

#include <cstddef>
#include <span>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "median_mechanism/core.h"

namespace median_mechanism {

struct FractionalHistogram {
  std::vector<double> weights;
};

// Constrains sum_{j : f(j) = 1} F_j to [m * center - half_width,
// m * center + half_width]. `center` is in query-value units (an answer in
// [0, 1] or near it); `half_width` is in count units, eps * m / 50 for the
// mechanism.
struct HalfspacePair {
  Predicate predicate;
  double center = 0;
  double half_width = 0;
};

class ConsistentPolytope {
 public:
  static absl::StatusOr<ConsistentPolytope> Create(size_t domain_size,
                                                   double m);

  absl::Status AddPair(const Predicate& f, double center, double half_width);

  size_t domain_size() const { return domain_size_; }
  double m() const { return m_; }
  const std::vector<HalfspacePair>& pairs() const { return pairs_; }

  // Strict evaluation of every base and pair constraint, no tolerance.
  absl::StatusOr<bool> Contains(const FractionalHistogram& f) const;
  bool ContainsPoint(std::span<const double> point) const;

  // Rows of A F <= b: -F_j <= 0 for each j, sum(F) <= m, then for each pair
  // its upper and lower face.
  void ConstraintSystem(Eigen::MatrixXd* a, Eigen::VectorXd* b) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<ConsistentPolytope> FromJson(
      const nlohmann::json& doc);

 private:
  ConsistentPolytope(size_t domain_size, double m)
      : domain_size_(domain_size), m_(m) {}

  size_t domain_size_;
  double m_;
  std::vector<HalfspacePair> pairs_;
};

struct InteriorPointResult {
  FractionalHistogram point;
  // Radius of the largest Euclidean ball around `point` inside the polytope.
  // Every constraint has slack at least radius * ||row||.
  double radius = 0;
};

// Chebyshev center by linear programming. Fails with FailedPrecondition
// ("degenerate polytope") when the polytope is empty or has no interior at
// the scale of m.
absl::StatusOr<InteriorPointResult> InteriorPoint(const ConsistentPolytope& p);

struct BoundingBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Exact per-coordinate extent, two linear programs per coordinate.
absl::StatusOr<BoundingBox> ComputeBoundingBox(const ConsistentPolytope& p);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_POLYTOPE_H_
