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

// A small dense simplex solver for the few linear programs the sampler needs
// (Chebyshev center and bounding box of a polytope).

#ifndef MEDIAN_MECHANISM_LINEAR_PROGRAM_H_
#define MEDIAN_MECHANISM_LINEAR_PROGRAM_H_

#include "Eigen/Dense"

namespace median_mechanism {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double value = 0;
  Eigen::VectorXd x;
};

// Maximizes c.x subject to A x <= b and x >= 0 with the two-phase tableau
// method. Ties in pivot selection go to the lowest variable index.
LpResult MaximizeLp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& c, int max_iterations = 100000);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_LINEAR_PROGRAM_H_
