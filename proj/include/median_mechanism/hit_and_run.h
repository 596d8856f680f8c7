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

// Hit-and-run sampling from a ConsistentPolytope.
//
// The walk runs in affinely transformed coordinates F = center + T y, which
// preserves uniformity. T starts as the per-coordinate bounding-box scaling
// and, when covariance rounding is on, is replaced by the Cholesky factor of
// a pilot-run covariance so thin oblique slabs look round to the walk.

#ifndef MEDIAN_MECHANISM_HIT_AND_RUN_H_
#define MEDIAN_MECHANISM_HIT_AND_RUN_H_

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/polytope.h"

namespace median_mechanism {

struct WalkConfig {
  // Zero selects the per-dimension default: 50 |X| burn-in steps and 5 |X|
  // steps between emitted samples.
  int64_t burn_in = 0;
  int64_t thinning = 0;
  int chains = 4;
  bool covariance_rounding = true;

  WalkConfig Resolved(size_t domain_size) const;
};

// Precomputed constraint system and coordinate transform, shared by chains.
struct WalkGeometry {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd start;
  Eigen::MatrixXd transform;
};

absl::StatusOr<WalkGeometry> PrepareWalk(const ConsistentPolytope& p,
                                         const WalkConfig& config,
                                         uint64_t seed);

// One persistent chain. Emitted points always pass strict membership.
class HitAndRunChain {
 public:
  HitAndRunChain(const ConsistentPolytope& p,
                 std::shared_ptr<const WalkGeometry> geometry,
                 int64_t thinning, uint64_t seed);

  void Step();
  void Advance(int64_t steps);
  // Advances `thinning` steps and returns the current point, stepping further
  // until the point passes strict membership.
  absl::StatusOr<FractionalHistogram> Next();

  const Eigen::VectorXd& position() const { return x_; }

 private:
  void RefreshSlack();

  const ConsistentPolytope* polytope_;
  std::shared_ptr<const WalkGeometry> geometry_;
  int64_t thinning_;
  Rng rng_;
  std::normal_distribution<double> normal_;
  Eigen::VectorXd x_;
  Eigen::VectorXd slack_;
  Eigen::VectorXd z_;
  Eigen::VectorXd direction_;
  Eigen::VectorXd rate_;
  int64_t steps_since_refresh_ = 0;
};

// `count` approximately uniform points from P, split across config.chains
// chains seeded from `rng` and concatenated in chain order.
absl::StatusOr<std::vector<FractionalHistogram>> SampleUniform(
    const ConsistentPolytope& p, int64_t count, const WalkConfig& config,
    Rng& rng);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_HIT_AND_RUN_H_
