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

// Laplace noise, seeded random streams, and the independent-perturbation
// baseline mechanism.

#ifndef MEDIAN_MECHANISM_NOISE_H_
#define MEDIAN_MECHANISM_NOISE_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "median_mechanism/core.h"

namespace median_mechanism {

// Every random draw in the library comes from this engine. A fixed seed gives
// a bit-identical stream on every platform.
using Rng = std::mt19937_64;

struct RngSeed {
  uint64_t seed = 0;
};

// Mixes (base, stream, index) into an independent 64-bit seed with the
// splitmix64 finalizer. Used for per-trial and per-component streams.
uint64_t DeriveSeed(uint64_t base, uint64_t stream, uint64_t index = 0);

// Uniform on the open interval (0, 1), built from the top 53 bits of one
// engine output. Never returns 0 or 1.
double UniformOpen01(Rng& rng);

class LaplaceScale {
 public:
  static absl::StatusOr<LaplaceScale> Create(double sigma);

  double sigma() const { return sigma_; }

 private:
  explicit LaplaceScale(double sigma) : sigma_(sigma) {}

  double sigma_;
};

// Inverse-CDF transform of a single uniform draw.
double SampleLaplace(const LaplaceScale& scale, Rng& rng);
// Laplace with sigma = 1; callers multiply by their scale.
double SampleUnitLaplace(Rng& rng);
// The unit-Laplace value whose CDF equals `u`, u in (0, 1).
double UnitLaplaceQuantile(double u);

// 1 - exp(-x/sigma)/2 for x >= 0, exp(x/sigma)/2 for x < 0.
double LaplaceCdf(const LaplaceScale& scale, double x);

// Per-answer scale k / (n * alpha) that makes k independently perturbed
// answers alpha-private in total. Zero when alpha is infinite.
double LaplaceBudgetScale(int64_t k, int64_t n, double alpha);

// Answers each query with f(D) + Lap(k / (n * alpha)), k = queries.size().
// Answers are not clamped. alpha = +infinity returns the exact values.
absl::StatusOr<std::vector<double>> LaplaceMechanism(
    const Database& db, std::span<const Predicate> queries, double alpha,
    Rng& rng);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_NOISE_H_
