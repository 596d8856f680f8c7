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

#include "median_mechanism/polytope.h"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "median_mechanism/core.h"
#include "median_mechanism/core_json.h"
#include "median_mechanism/linear_program.h"

namespace median_mechanism {

absl::StatusOr<ConsistentPolytope> ConsistentPolytope::Create(
    size_t domain_size, double m) {
  if (domain_size < 1) {
    return absl::InvalidArgumentError("domain must be nonempty");
  }
  if (!(m > 0.0) || !std::isfinite(m)) {
    return absl::InvalidArgumentError("m must be finite and positive");
  }
  return ConsistentPolytope(domain_size, m);
}

absl::Status ConsistentPolytope::AddPair(const Predicate& f, double center,
                                         double half_width) {
  if (f.domain_size() != domain_size_) {
    return absl::InvalidArgumentError(absl::StrCat(
        "predicate covers ", f.domain_size(), " elements, polytope covers ",
        domain_size_));
  }
  if (!std::isfinite(center) || !(half_width >= 0.0)) {
    return absl::InvalidArgumentError("pair needs a finite center and width");
  }
  pairs_.push_back({f, center, half_width});
  return absl::OkStatus();
}

bool ConsistentPolytope::ContainsPoint(std::span<const double> point) const {
  if (point.size() != domain_size_) return false;
  double total = 0.0;
  for (double w : point) {
    if (w < 0.0) return false;
    total += w;
  }
  if (total > m_) return false;
  for (const HalfspacePair& pair : pairs_) {
    double s = 0.0;
    for (size_t j = 0; j < domain_size_; ++j) {
      if (pair.predicate.Contains(j)) s += point[j];
    }
    const double mid = m_ * pair.center;
    if (s > mid + pair.half_width || s < mid - pair.half_width) return false;
  }
  return true;
}

absl::StatusOr<bool> ConsistentPolytope::Contains(
    const FractionalHistogram& f) const {
  if (f.weights.size() != domain_size_) {
    return absl::InvalidArgumentError(absl::StrCat(
        "histogram has ", f.weights.size(), " entries, polytope covers ",
        domain_size_));
  }
  return ContainsPoint(f.weights);
}

void ConsistentPolytope::ConstraintSystem(Eigen::MatrixXd* a,
                                          Eigen::VectorXd* b) const {
  const int d = static_cast<int>(domain_size_);
  const int rows = d + 1 + 2 * static_cast<int>(pairs_.size());
  a->setZero(rows, d);
  b->setZero(rows);
  for (int j = 0; j < d; ++j) (*a)(j, j) = -1.0;
  a->row(d).setOnes();
  (*b)(d) = m_;
  int row = d + 1;
  for (const HalfspacePair& pair : pairs_) {
    for (int j = 0; j < d; ++j) {
      if (pair.predicate.Contains(j)) {
        (*a)(row, j) = 1.0;
        (*a)(row + 1, j) = -1.0;
      }
    }
    (*b)(row) = m_ * pair.center + pair.half_width;
    (*b)(row + 1) = -(m_ * pair.center - pair.half_width);
    row += 2;
  }
}

nlohmann::json ConsistentPolytope::ToJson() const {
  nlohmann::json pairs = nlohmann::json::array();
  for (const HalfspacePair& pair : pairs_) {
    std::vector<int> bits(pair.predicate.indicator().begin(),
                          pair.predicate.indicator().end());
    pairs.push_back({{"indicator", bits},
                     {"center", pair.center},
                     {"halfwidth", pair.half_width}});
  }
  return {{"domain_size", domain_size_}, {"m", m_}, {"pairs", pairs}};
}

absl::StatusOr<ConsistentPolytope> ConsistentPolytope::FromJson(
    const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("m") || !doc["m"].is_number() ||
      !doc.contains("pairs") || !doc["pairs"].is_array()) {
    return absl::InvalidArgumentError("polytope needs 'm' and 'pairs'");
  }
  size_t domain_size = 0;
  if (doc.contains("domain_size")) {
    if (!doc["domain_size"].is_number_unsigned()) {
      return absl::InvalidArgumentError("'domain_size' must be unsigned");
    }
    domain_size = doc["domain_size"].get<size_t>();
  } else if (!doc["pairs"].empty() &&
             doc["pairs"][0].contains("indicator") &&
             doc["pairs"][0]["indicator"].is_array()) {
    domain_size = doc["pairs"][0]["indicator"].size();
  } else {
    return absl::InvalidArgumentError(
        "polytope needs 'domain_size' when it has no pairs");
  }
  absl::StatusOr<ConsistentPolytope> p =
      Create(domain_size, doc["m"].get<double>());
  if (!p.ok()) return p.status();
  for (const nlohmann::json& pair : doc["pairs"]) {
    if (!pair.is_object() || !pair.contains("center") ||
        !pair["center"].is_number() || !pair.contains("halfwidth") ||
        !pair["halfwidth"].is_number()) {
      return absl::InvalidArgumentError(
          "pair needs 'indicator', 'center' and 'halfwidth'");
    }
    nlohmann::json predicate = {{"domain_size", domain_size},
                                {"indicator", pair.value("indicator",
                                                         nlohmann::json())}};
    absl::StatusOr<Predicate> f = PredicateFromJson(predicate);
    if (!f.ok()) return f.status();
    absl::Status s = p->AddPair(*f, pair["center"].get<double>(),
                                pair["halfwidth"].get<double>());
    if (!s.ok()) return s;
  }
  return p;
}

absl::StatusOr<InteriorPointResult> InteriorPoint(
    const ConsistentPolytope& p) {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  p.ConstraintSystem(&a, &b);
  const int d = static_cast<int>(p.domain_size());
  // Variables (F, s): a_i . F + ||a_i|| s <= b_i, maximize s. F >= 0 is the
  // LP's own sign constraint, and the explicit -F_j <= 0 rows turn into
  // F_j >= s.
  Eigen::MatrixXd lp(a.rows(), d + 1);
  lp.leftCols(d) = a;
  lp.col(d) = a.rowwise().norm();
  Eigen::VectorXd objective = Eigen::VectorXd::Zero(d + 1);
  objective(d) = 1.0;
  LpResult result = MaximizeLp(lp, b, objective);
  if (result.status == LpStatus::kInfeasible) {
    return absl::FailedPreconditionError(
        "degenerate polytope: the constraints are infeasible");
  }
  if (result.status != LpStatus::kOptimal) {
    return absl::InternalError("interior-point LP did not converge");
  }
  const double radius = result.x(d);
  if (!(radius > 1e-9 * p.m())) {
    return absl::FailedPreconditionError(absl::StrCat(
        "degenerate polytope: inscribed radius ", radius,
        " is negligible at scale m = ", p.m()));
  }
  InteriorPointResult out;
  out.point.weights.assign(result.x.data(), result.x.data() + d);
  out.radius = radius;
  if (!p.ContainsPoint(out.point.weights)) {
    return absl::InternalError("interior-point LP returned an outside point");
  }
  return out;
}

absl::StatusOr<BoundingBox> ComputeBoundingBox(const ConsistentPolytope& p) {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  p.ConstraintSystem(&a, &b);
  const size_t d = p.domain_size();
  BoundingBox box;
  box.lower.resize(d);
  box.upper.resize(d);
  for (size_t j = 0; j < d; ++j) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<int>(d));
      c(static_cast<int>(j)) = sign;
      LpResult r = MaximizeLp(a, b, c);
      if (r.status == LpStatus::kInfeasible) {
        return absl::FailedPreconditionError(
            "degenerate polytope: the constraints are infeasible");
      }
      if (r.status != LpStatus::kOptimal) {
        return absl::InternalError("bounding-box LP did not converge");
      }
      if (sign > 0) {
        box.upper[j] = r.value;
      } else {
        box.lower[j] = -r.value;
      }
    }
  }
  return box;
}

}  // namespace median_mechanism
