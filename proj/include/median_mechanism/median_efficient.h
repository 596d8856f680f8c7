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

// The median mechanism over the fractional consistent polytope, with r and
// the median estimated from hit-and-run samples.

#ifndef MEDIAN_MECHANISM_MEDIAN_EFFICIENT_H_
#define MEDIAN_MECHANISM_MEDIAN_EFFICIENT_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "median_mechanism/core.h"
#include "median_mechanism/hit_and_run.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/polytope.h"
#include "median_mechanism/transcript.h"

namespace median_mechanism {

// (1/m) * sum of F_j over the elements satisfying f.
absl::StatusOr<double> EvaluateQueryFractional(const Predicate& f,
                                               const FractionalHistogram& h,
                                               double m);

// ceil(ln(4k / delta) * (50 / eps)^2).
int64_t DefaultSampleCount(int64_t k, double delta, double eps);

struct EstimatorConfig {
  // Samples per estimate. Zero selects DefaultSampleCount(k, 0.05, eps).
  int64_t sample_count = 0;
  WalkConfig walk;
};

struct Estimate {
  double value = 0;
  // Batch-means standard error over 20 contiguous batches (plain sample
  // standard error below 40 samples).
  double stderr_value = 0;
};

// Monte Carlo mean of exp(-|f(F) - truth| / eps) over `samples`.
Estimate EstimateRFromSamples(double truth, const Predicate& f,
                              std::span<const FractionalHistogram> samples,
                              double m, double eps);
// Lower median of f over `samples`.
double MedianFromSamples(const Predicate& f,
                         std::span<const FractionalHistogram> samples,
                         double m);

absl::StatusOr<Estimate> EstimateR(const Database& db, const Predicate& f,
                                   const ConsistentPolytope& p, double eps,
                                   const EstimatorConfig& config, Rng& rng);
absl::StatusOr<double> EstimateMedian(const Predicate& f,
                                      const ConsistentPolytope& p,
                                      const EstimatorConfig& config, Rng& rng);

struct EfficientSessionOptions {
  NoiseOverrides overrides;
  EstimatorConfig estimator;
};

class EfficientSession {
 public:
  static constexpr double kHardCapMultiplier = 40.0;

  // The noise stream is seeded with `seed` exactly as in BasicSession, so a
  // basic and an efficient session with the same seed share their draws. The
  // sampler uses a separate stream derived from `seed`.
  static absl::StatusOr<EfficientSession> Create(
      const Database& db, const MechanismParams& params, uint64_t seed,
      EfficientSessionOptions options = {});

  // Same contract as BasicSession::AnswerQuery. A polytope that loses its
  // interior fails the session with kDegeneratePolytope.
  absl::StatusOr<TranscriptEntry> AnswerQuery(const Predicate& f);

  const Transcript& transcript() const { return transcript_; }
  const ConsistentPolytope& polytope() const { return *polytope_; }
  const MechanismParams& params() const { return params_; }
  int64_t sample_count() const { return sample_count_; }
  bool failed() const { return transcript_.failed(); }

 private:
  EfficientSession(Database db, MechanismParams params,
                   ConsistentPolytope polytope, SessionNoise noise,
                   EstimatorConfig estimator, uint64_t sampler_seed);

  Database db_;
  MechanismParams params_;
  // Heap-allocated so the session stays movable while samplers point at it.
  std::unique_ptr<ConsistentPolytope> polytope_;
  SessionNoise noise_;
  EstimatorConfig estimator_;
  int64_t sample_count_;
  Rng sampler_rng_;
  std::vector<FractionalHistogram> pool_;
  bool pool_stale_ = true;
  std::vector<double> witness_;
  Transcript transcript_;
  int64_t hard_count_ = 0;
};

absl::StatusOr<Transcript> RunEfficientSession(
    const Database& db, QuerySource& source, const MechanismParams& params,
    uint64_t seed, EfficientSessionOptions options = {});

// Draws n rows i.i.d. from the distribution proportional to `weights`.
absl::StatusOr<Database> DrawDatabase(std::span<const double> weights,
                                      int64_t n, Rng& rng);

// A point F uniform on {F >= 0, sum(F) <= 1}, then n rows drawn from F.
absl::StatusOr<Database> DatabaseSample(size_t domain_size, int64_t n,
                                        Rng& rng);

// Many DatabaseSample draws from one persistent walk on the base simplex.
// Successive draws should be close to independent, so an unset thinning
// defaults to kDatabaseSamplerThinning * |X| steps rather than the walk
// default.
inline constexpr int64_t kDatabaseSamplerThinning = 20;
class DatabaseSampler {
 public:
  static absl::StatusOr<std::unique_ptr<DatabaseSampler>> Create(
      size_t domain_size, uint64_t seed, WalkConfig walk = {});

  // The next F, uniform on the unit-scale base simplex.
  absl::StatusOr<FractionalHistogram> NextHistogram();
  absl::StatusOr<Database> NextDatabase(int64_t n);

 private:
  DatabaseSampler(size_t domain_size, uint64_t seed)
      : domain_size_(domain_size), rng_(seed) {}

  size_t domain_size_;
  Rng rng_;
  std::optional<ConsistentPolytope> base_;
  std::unique_ptr<HitAndRunChain> chain_;
};

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_MEDIAN_EFFICIENT_H_
