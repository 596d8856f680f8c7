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

#include "median_mechanism/hit_and_run.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "Eigen/Cholesky"
#include "Eigen/Dense"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/polytope.h"

namespace median_mechanism {
namespace {

constexpr int64_t kRefreshInterval = 64;
constexpr int kMaxMembershipRetries = 1000;

// Box-scaled walk used only to estimate the covariance for rounding.
Eigen::MatrixXd PilotCovariance(const ConsistentPolytope& p,
                                std::shared_ptr<const WalkGeometry> box,
                                int64_t burn_in, uint64_t seed) {
  const int d = static_cast<int>(p.domain_size());
  const int64_t samples = std::max<int64_t>(100, 20 * d);
  HitAndRunChain chain(p, box, d, seed);
  chain.Advance(burn_in);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (int64_t i = 0; i < samples; ++i) {
    chain.Advance(d);
    const Eigen::VectorXd& x = chain.position();
    mean += x;
    second += x * x.transpose();
  }
  mean /= static_cast<double>(samples);
  second /= static_cast<double>(samples);
  return second - mean * mean.transpose();
}

}  // namespace

WalkConfig WalkConfig::Resolved(size_t domain_size) const {
  WalkConfig out = *this;
  const int64_t d = static_cast<int64_t>(domain_size);
  if (out.burn_in <= 0) out.burn_in = 50 * d;
  if (out.thinning <= 0) out.thinning = 5 * d;
  if (out.chains <= 0) out.chains = 1;
  return out;
}

absl::StatusOr<WalkGeometry> PrepareWalk(const ConsistentPolytope& p,
                                         const WalkConfig& config,
                                         uint64_t seed) {
  const WalkConfig cfg = config.Resolved(p.domain_size());
  absl::StatusOr<InteriorPointResult> interior = InteriorPoint(p);
  if (!interior.ok()) return interior.status();
  absl::StatusOr<BoundingBox> box = ComputeBoundingBox(p);
  if (!box.ok()) return box.status();

  const int d = static_cast<int>(p.domain_size());
  auto geometry = std::make_shared<WalkGeometry>();
  p.ConstraintSystem(&geometry->a, &geometry->b);
  geometry->start = Eigen::Map<const Eigen::VectorXd>(
      interior->point.weights.data(), d);
  geometry->transform = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    const double width = box->upper[j] - box->lower[j];
    geometry->transform(j, j) = width > 0.0 ? width : interior->radius;
  }
  if (cfg.covariance_rounding && d > 1) {
    Eigen::MatrixXd cov =
        PilotCovariance(p, geometry, cfg.burn_in, DeriveSeed(seed, 0x9170));
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd lower = llt.matrixL();
      // A singular-looking factor would freeze some directions.
      const double min_diag = lower.diagonal().minCoeff();
      if (min_diag > 1e-9 * p.m() && std::isfinite(lower.sum())) {
        geometry->transform = lower;
      }
    }
  }
  return std::move(*geometry);
}

HitAndRunChain::HitAndRunChain(const ConsistentPolytope& p,
                               std::shared_ptr<const WalkGeometry> geometry,
                               int64_t thinning, uint64_t seed)
    : polytope_(&p),
      geometry_(std::move(geometry)),
      thinning_(std::max<int64_t>(thinning, 1)),
      rng_(seed),
      x_(geometry_->start) {
  RefreshSlack();
}

void HitAndRunChain::RefreshSlack() {
  slack_ = geometry_->b - geometry_->a * x_;
  steps_since_refresh_ = 0;
}

void HitAndRunChain::Step() {
  const int d = static_cast<int>(x_.size());
  z_.resize(d);
  for (int j = 0; j < d; ++j) z_(j) = normal_(rng_);
  direction_.noalias() = geometry_->transform * z_;
  rate_.noalias() = geometry_->a * direction_;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rate_.size(); ++i) {
    const double s = std::max(slack_(i), 0.0);
    const double r = rate_(i);
    if (r > 0.0) {
      hi = std::min(hi, s / r);
    } else if (r < 0.0) {
      lo = std::max(lo, s / r);
    }
  }
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) return;
  const double lambda = lo + (hi - lo) * UniformOpen01(rng_);
  x_.noalias() += lambda * direction_;
  slack_.noalias() -= lambda * rate_;
  if (++steps_since_refresh_ >= kRefreshInterval) RefreshSlack();
}

void HitAndRunChain::Advance(int64_t steps) {
  for (int64_t i = 0; i < steps; ++i) Step();
}

absl::StatusOr<FractionalHistogram> HitAndRunChain::Next() {
  Advance(thinning_);
  for (int attempt = 0; attempt < kMaxMembershipRetries; ++attempt) {
    if (polytope_->ContainsPoint(std::span<const double>(x_.data(),
                                                          x_.size()))) {
      FractionalHistogram out;
      out.weights.assign(x_.data(), x_.data() + x_.size());
      return out;
    }
    RefreshSlack();
    Step();
  }
  return absl::InternalError("walk could not return to the polytope");
}

absl::StatusOr<std::vector<FractionalHistogram>> SampleUniform(
    const ConsistentPolytope& p, int64_t count, const WalkConfig& config,
    Rng& rng) {
  if (count < 0) return absl::InvalidArgumentError("count must be >= 0");
  const WalkConfig cfg = config.Resolved(p.domain_size());
  const uint64_t base = rng();
  absl::StatusOr<WalkGeometry> geometry = PrepareWalk(p, cfg, base);
  if (!geometry.ok()) return geometry.status();
  auto shared = std::make_shared<const WalkGeometry>(*std::move(geometry));
  std::vector<FractionalHistogram> out;
  out.reserve(static_cast<size_t>(count));
  for (int c = 0; c < cfg.chains; ++c) {
    const int64_t share =
        count / cfg.chains + (c < count % cfg.chains ? 1 : 0);
    if (share == 0) continue;
    HitAndRunChain chain(p, shared, cfg.thinning,
                         DeriveSeed(base, 1, static_cast<uint64_t>(c)));
    chain.Advance(cfg.burn_in);
    for (int64_t i = 0; i < share; ++i) {
      absl::StatusOr<FractionalHistogram> point = chain.Next();
      if (!point.ok()) return point.status();
      out.push_back(*std::move(point));
    }
  }
  return out;
}

}  // namespace median_mechanism
