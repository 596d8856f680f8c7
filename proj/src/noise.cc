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

#include "median_mechanism/noise.h"

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "median_mechanism/core.h"

namespace median_mechanism {

uint64_t DeriveSeed(uint64_t base, uint64_t stream, uint64_t index) {
  auto mix = [](uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ stream) ^ index);
}

double UniformOpen01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

absl::StatusOr<LaplaceScale> LaplaceScale::Create(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError("Laplace scale must be finite and > 0");
  }
  return LaplaceScale(sigma);
}

double UnitLaplaceQuantile(double u) {
  if (u < 0.5) return std::log(2.0 * u);
  return -std::log(2.0 * (1.0 - u));
}

double SampleUnitLaplace(Rng& rng) {
  return UnitLaplaceQuantile(UniformOpen01(rng));
}

double SampleLaplace(const LaplaceScale& scale, Rng& rng) {
  return scale.sigma() * SampleUnitLaplace(rng);
}

double LaplaceCdf(const LaplaceScale& scale, double x) {
  const double z = x / scale.sigma();
  if (z >= 0.0) return 1.0 - 0.5 * std::exp(-z);
  return 0.5 * std::exp(z);
}

double LaplaceBudgetScale(int64_t k, int64_t n, double alpha) {
  if (std::isinf(alpha)) return 0.0;
  return static_cast<double>(k) / (static_cast<double>(n) * alpha);
}

absl::StatusOr<std::vector<double>> LaplaceMechanism(
    const Database& db, std::span<const Predicate> queries, double alpha,
    Rng& rng) {
  if (queries.empty()) {
    return absl::InvalidArgumentError("need at least one query");
  }
  if (!(alpha > 0.0)) {
    return absl::InvalidArgumentError("alpha must be positive");
  }
  const double sigma = LaplaceBudgetScale(
      static_cast<int64_t>(queries.size()), db.size(), alpha);
  std::vector<double> answers;
  answers.reserve(queries.size());
  for (const Predicate& f : queries) {
    absl::StatusOr<double> truth = EvaluateQuery(f, db);
    if (!truth.ok()) return truth.status();
    double a = *truth;
    if (sigma > 0.0) a += sigma * SampleUnitLaplace(rng);
    answers.push_back(a);
  }
  return answers;
}

}  // namespace median_mechanism
