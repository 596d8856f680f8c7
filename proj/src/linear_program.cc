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

#include "median_mechanism/linear_program.h"

#include <limits>
#include <utility>
#include <vector>

#include "Eigen/Dense"

namespace median_mechanism {
namespace {

constexpr double kPivotEps = 1e-11;

class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
          const Eigen::VectorXd& c)
      : rows_(static_cast<int>(a.rows())),
        cols_(static_cast<int>(a.cols())),
        d_(Eigen::MatrixXd::Zero(rows_ + 2, cols_ + 2)),
        basis_(rows_),
        nonbasis_(cols_ + 1) {
    d_.topLeftCorner(rows_, cols_) = a;
    for (int i = 0; i < rows_; ++i) {
      basis_[i] = cols_ + i;
      d_(i, cols_) = -1.0;
      d_(i, cols_ + 1) = b(i);
    }
    for (int j = 0; j < cols_; ++j) {
      nonbasis_[j] = j;
      d_(rows_, j) = -c(j);
    }
    nonbasis_[cols_] = -1;
    d_(rows_ + 1, cols_) = 1.0;
  }

  LpResult Solve(int max_iterations) {
    LpResult result;
    iterations_left_ = max_iterations;
    int r = 0;
    for (int i = 1; i < rows_; ++i) {
      if (d_(i, cols_ + 1) < d_(r, cols_ + 1)) r = i;
    }
    if (rows_ > 0 && d_(r, cols_ + 1) < -kPivotEps) {
      Pivot(r, cols_);
      const int phase1 = Simplex(1);
      if (phase1 == kLimit) {
        result.status = LpStatus::kIterationLimit;
        return result;
      }
      if (phase1 != kDone || d_(rows_ + 1, cols_ + 1) < -kPivotEps) {
        result.status = LpStatus::kInfeasible;
        return result;
      }
      for (int i = 0; i < rows_; ++i) {
        if (basis_[i] != -1) continue;
        int s = -1;
        for (int j = 0; j <= cols_; ++j) {
          if (s == -1 || d_(i, j) < d_(i, s) ||
              (d_(i, j) == d_(i, s) && nonbasis_[j] < nonbasis_[s])) {
            s = j;
          }
        }
        Pivot(i, s);
      }
    }
    const int phase2 = Simplex(2);
    if (phase2 == kLimit) {
      result.status = LpStatus::kIterationLimit;
      return result;
    }
    if (phase2 == kUnboundedRay) {
      result.status = LpStatus::kUnbounded;
      result.value = std::numeric_limits<double>::infinity();
      return result;
    }
    result.status = LpStatus::kOptimal;
    result.x = Eigen::VectorXd::Zero(cols_);
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] >= 0 && basis_[i] < cols_) {
        result.x(basis_[i]) = d_(i, cols_ + 1);
      }
    }
    result.value = d_(rows_, cols_ + 1);
    return result;
  }

 private:
  static constexpr int kDone = 0;
  static constexpr int kUnboundedRay = 1;
  static constexpr int kLimit = 2;

  void Pivot(int r, int s) {
    const double inv = 1.0 / d_(r, s);
    for (int i = 0; i < rows_ + 2; ++i) {
      if (i == r) continue;
      const double factor = d_(i, s) * inv;
      if (factor == 0.0) continue;
      for (int j = 0; j < cols_ + 2; ++j) {
        if (j != s) d_(i, j) -= d_(r, j) * factor;
      }
    }
    for (int j = 0; j < cols_ + 2; ++j) {
      if (j != s) d_(r, j) *= inv;
    }
    for (int i = 0; i < rows_ + 2; ++i) {
      if (i != r) d_(i, s) *= -inv;
    }
    d_(r, s) = inv;
    std::swap(basis_[r], nonbasis_[s]);
  }

  int Simplex(int phase) {
    const int x = phase == 1 ? rows_ + 1 : rows_;
    while (true) {
      if (iterations_left_-- <= 0) return kLimit;
      int s = -1;
      for (int j = 0; j <= cols_; ++j) {
        if (phase == 2 && nonbasis_[j] == -1) continue;
        if (s == -1 || d_(x, j) < d_(x, s) ||
            (d_(x, j) == d_(x, s) && nonbasis_[j] < nonbasis_[s])) {
          s = j;
        }
      }
      if (s == -1 || d_(x, s) > -kPivotEps) return kDone;
      int r = -1;
      for (int i = 0; i < rows_; ++i) {
        if (d_(i, s) < kPivotEps) continue;
        if (r == -1) {
          r = i;
          continue;
        }
        const double lhs = d_(i, cols_ + 1) / d_(i, s);
        const double rhs = d_(r, cols_ + 1) / d_(r, s);
        if (lhs < rhs || (lhs == rhs && basis_[i] < basis_[r])) r = i;
      }
      if (r == -1) return kUnboundedRay;
      Pivot(r, s);
    }
  }

  int rows_;
  int cols_;
  Eigen::MatrixXd d_;
  std::vector<int> basis_;
  std::vector<int> nonbasis_;
  int iterations_left_ = 0;
};

}  // namespace

LpResult MaximizeLp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& c, int max_iterations) {
  Tableau tableau(a, b, c);
  return tableau.Solve(max_iterations);
}

}  // namespace median_mechanism
