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

#include "median_mechanism/median_efficient.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "median_mechanism/core.h"
#include "median_mechanism/hit_and_run.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/polytope.h"
#include "median_mechanism/transcript.h"

namespace median_mechanism {
namespace {

constexpr int kBatches = 20;

double FractionalValue(const Predicate& f, const FractionalHistogram& h,
                       double m) {
  double s = 0.0;
  for (size_t j = 0; j < h.weights.size(); ++j) {
    if (f.Contains(j)) s += h.weights[j];
  }
  return s / m;
}

}  // namespace

absl::StatusOr<double> EvaluateQueryFractional(const Predicate& f,
                                               const FractionalHistogram& h,
                                               double m) {
  if (f.domain_size() != h.weights.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "predicate covers ", f.domain_size(), " elements, histogram has ",
        h.weights.size()));
  }
  if (!(m > 0.0)) return absl::InvalidArgumentError("m must be positive");
  return FractionalValue(f, h, m);
}

int64_t DefaultSampleCount(int64_t k, double delta, double eps) {
  const double per = 50.0 / eps;
  return static_cast<int64_t>(std::ceil(
      std::log(4.0 * static_cast<double>(k) / delta) * per * per));
}

Estimate EstimateRFromSamples(double truth, const Predicate& f,
                              std::span<const FractionalHistogram> samples,
                              double m, double eps) {
  Estimate out;
  const size_t count = samples.size();
  if (count == 0) return out;
  std::vector<double> values(count);
  double sum = 0.0;
  for (size_t i = 0; i < count; ++i) {
    values[i] = std::exp(-std::abs(FractionalValue(f, samples[i], m) - truth) /
                         eps);
    sum += values[i];
  }
  out.value = sum / static_cast<double>(count);
  if (count < 2) return out;
  if (count < 2 * kBatches) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.value) * (v - out.value);
    out.stderr_value = std::sqrt(ss / static_cast<double>(count - 1) /
                                 static_cast<double>(count));
    return out;
  }
  // Contiguous batches absorb the autocorrelation of each chain.
  double ss = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    const size_t lo = count * b / kBatches;
    const size_t hi = count * (b + 1) / kBatches;
    double batch = 0.0;
    for (size_t i = lo; i < hi; ++i) batch += values[i];
    batch /= static_cast<double>(hi - lo);
    ss += (batch - out.value) * (batch - out.value);
  }
  out.stderr_value = std::sqrt(ss / (kBatches - 1) / kBatches);
  return out;
}

double MedianFromSamples(const Predicate& f,
                         std::span<const FractionalHistogram> samples,
                         double m) {
  if (samples.empty()) return 0.0;
  std::vector<double> values;
  values.reserve(samples.size());
  for (const FractionalHistogram& h : samples) {
    values.push_back(FractionalValue(f, h, m));
  }
  const size_t target = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + target, values.end());
  return values[target];
}

namespace {

absl::StatusOr<std::vector<FractionalHistogram>> DrawPool(
    const ConsistentPolytope& p, const EstimatorConfig& config, Rng& rng) {
  if (config.sample_count < 1) {
    return absl::InvalidArgumentError("sample_count must be at least 1");
  }
  return SampleUniform(p, config.sample_count, config.walk, rng);
}

}  // namespace

absl::StatusOr<Estimate> EstimateR(const Database& db, const Predicate& f,
                                   const ConsistentPolytope& p, double eps,
                                   const EstimatorConfig& config, Rng& rng) {
  absl::StatusOr<double> truth = EvaluateQuery(f, db);
  if (!truth.ok()) return truth.status();
  if (f.domain_size() != p.domain_size()) {
    return absl::InvalidArgumentError("predicate and polytope differ in size");
  }
  absl::StatusOr<std::vector<FractionalHistogram>> pool =
      DrawPool(p, config, rng);
  if (!pool.ok()) return pool.status();
  return EstimateRFromSamples(*truth, f, *pool, p.m(), eps);
}

absl::StatusOr<double> EstimateMedian(const Predicate& f,
                                      const ConsistentPolytope& p,
                                      const EstimatorConfig& config, Rng& rng) {
  if (f.domain_size() != p.domain_size()) {
    return absl::InvalidArgumentError("predicate and polytope differ in size");
  }
  absl::StatusOr<std::vector<FractionalHistogram>> pool =
      DrawPool(p, config, rng);
  if (!pool.ok()) return pool.status();
  return MedianFromSamples(f, *pool, p.m());
}

EfficientSession::EfficientSession(Database db, MechanismParams params,
                                   ConsistentPolytope polytope,
                                   SessionNoise noise,
                                   EstimatorConfig estimator,
                                   uint64_t sampler_seed)
    : db_(std::move(db)),
      params_(params),
      polytope_(std::make_unique<ConsistentPolytope>(std::move(polytope))),
      noise_(std::move(noise)),
      estimator_(std::move(estimator)),
      sample_count_(estimator_.sample_count),
      sampler_rng_(sampler_seed) {}

absl::StatusOr<EfficientSession> EfficientSession::Create(
    const Database& db, const MechanismParams& params, uint64_t seed,
    EfficientSessionOptions options) {
  if (absl::Status s = ValidateOverrides(options.overrides); !s.ok()) return s;
  if (params.domain_size != db.domain_size()) {
    return absl::InvalidArgumentError("params and database domains differ");
  }
  if (params.n != db.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "params were derived for n = ", params.n, " but the database has ",
        db.size(), " rows"));
  }
  if (!(params.alpha_prime > 0.0) || !(params.gamma > 0.0) || params.m < 1) {
    return absl::InvalidArgumentError("params are not initialized");
  }
  if (options.estimator.sample_count < 0) {
    return absl::InvalidArgumentError("sample_count must be nonnegative");
  }
  if (options.estimator.sample_count == 0) {
    options.estimator.sample_count =
        DefaultSampleCount(params.k, 0.05, params.eps);
  }
  const double m = static_cast<double>(params.m);
  absl::StatusOr<ConsistentPolytope> polytope =
      ConsistentPolytope::Create(db.domain_size(), m);
  if (!polytope.ok()) return polytope.status();
  EfficientSession session(db, params, *std::move(polytope),
                           SessionNoise(seed, std::move(options.overrides)),
                           std::move(options.estimator),
                           DeriveSeed(seed, 0x5a3b1e));
  session.transcript_.mechanism = "median-efficient";
  session.transcript_.hard_cap =
      HardQueryCap(kHardCapMultiplier, params.m, params.domain_size);
  session.witness_.resize(db.domain_size());
  for (size_t j = 0; j < db.domain_size(); ++j) {
    session.witness_[j] = m * static_cast<double>(db.count(j)) /
                          static_cast<double>(db.size());
  }
  return session;
}

absl::StatusOr<TranscriptEntry> EfficientSession::AnswerQuery(
    const Predicate& f) {
  if (failed()) {
    return absl::FailedPreconditionError("session has already failed");
  }
  if (static_cast<int64_t>(transcript_.entries.size()) >= params_.k) {
    return absl::FailedPreconditionError("query budget k is exhausted");
  }
  absl::StatusOr<double> truth = EvaluateQuery(f, db_);
  if (!truth.ok()) return truth.status();

  const QueryDraws draws = noise_.Next();
  const double n = static_cast<double>(params_.n);
  const double m = static_cast<double>(params_.m);
  TranscriptEntry e;
  e.index = static_cast<int64_t>(transcript_.entries.size()) + 1;
  e.query = f;
  e.truth = *truth;

  if (pool_stale_) {
    absl::StatusOr<std::vector<FractionalHistogram>> pool =
        SampleUniform(*polytope_, sample_count_, estimator_.walk,
                      sampler_rng_);
    if (!pool.ok()) {
      if (absl::IsFailedPrecondition(pool.status())) {
        transcript_.failure = FailureCause::kDegeneratePolytope;
        transcript_.failure_index = e.index;
        transcript_.failure_hard_count = hard_count_;
      }
      return pool.status();
    }
    pool_ = *std::move(pool);
    pool_stale_ = false;
  }

  const ThresholdDraw threshold =
      ThresholdFromUniform(params_.gamma, draws.threshold_u);
  e.t = threshold.t;
  e.j = threshold.j;
  const Estimate r = EstimateRFromSamples(e.truth, f, pool_, m, params_.eps);
  e.r = r.value;
  e.r_stderr = r.stderr_value;
  e.r_hat = e.r + draws.r_noise * 2.0 / (params_.eps * n * params_.alpha_prime);

  if (e.r_hat >= e.t) {
    e.d = Classification::kEasy;
    e.a = MedianFromSamples(f, pool_, m);
    e.hard_count = hard_count_;
  } else {
    e.d = Classification::kHard;
    e.a = e.truth + draws.answer_noise / (n * params_.alpha_prime);
    ++hard_count_;
    e.hard_count = hard_count_;
    if (hard_count_ > transcript_.hard_cap) {
      transcript_.failure = FailureCause::kHardCap;
      transcript_.failure_index = e.index;
      transcript_.failure_hard_count = hard_count_;
      return absl::ResourceExhaustedError(absl::StrCat(
          "hard-answer cap ", transcript_.hard_cap, " exceeded at query ",
          e.index));
    }
    absl::Status added = polytope_->AddPair(f, e.a, params_.eps * m / 50.0);
    if (!added.ok()) return added;
    pool_stale_ = true;
    if (!transcript_.witness_evicted &&
        !polytope_->ContainsPoint(witness_)) {
      transcript_.witness_evicted = true;
    }
  }
  e.polytope_pairs = static_cast<int64_t>(polytope_->pairs().size());
  transcript_.entries.push_back(e);
  return e;
}

absl::StatusOr<Transcript> RunEfficientSession(
    const Database& db, QuerySource& source, const MechanismParams& params,
    uint64_t seed, EfficientSessionOptions options) {
  absl::StatusOr<EfficientSession> session =
      EfficientSession::Create(db, params, seed, std::move(options));
  if (!session.ok()) return session.status();
  std::vector<ReleasedAnswer> history;
  while (static_cast<int64_t>(history.size()) < params.k) {
    std::optional<Predicate> f = source.Next(history);
    if (!f.has_value()) break;
    absl::StatusOr<TranscriptEntry> e = session->AnswerQuery(*f);
    if (!e.ok()) {
      if (session->failed()) break;
      return e.status();
    }
    history.push_back({e->d, e->a});
  }
  return session->transcript();
}

absl::StatusOr<Database> DrawDatabase(std::span<const double> weights,
                                      int64_t n, Rng& rng) {
  if (n < 1) return absl::InvalidArgumentError("n must be at least 1");
  if (weights.empty()) return absl::InvalidArgumentError("empty weights");
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (size_t j = 0; j < weights.size(); ++j) {
    if (!(weights[j] >= 0.0)) {
      return absl::InvalidArgumentError("weights must be nonnegative");
    }
    total += weights[j];
    cumulative[j] = total;
  }
  std::vector<int64_t> counts(weights.size(), 0);
  if (!(total > 0.0)) {
    // A zero histogram has no direction; fall back to uniform rows.
    for (int64_t i = 0; i < n; ++i) {
      const double u = UniformOpen01(rng) * static_cast<double>(weights.size());
      ++counts[std::min(static_cast<size_t>(u), weights.size() - 1)];
    }
    return Database::FromCounts(std::move(counts));
  }
  for (int64_t i = 0; i < n; ++i) {
    const double u = UniformOpen01(rng) * total;
    size_t j = static_cast<size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) -
        cumulative.begin());
    ++counts[std::min(j, weights.size() - 1)];
  }
  return Database::FromCounts(std::move(counts));
}

absl::StatusOr<Database> DatabaseSample(size_t domain_size, int64_t n,
                                        Rng& rng) {
  if (n < 1) return absl::InvalidArgumentError("n must be at least 1");
  if (domain_size < 1) return absl::InvalidArgumentError("empty domain");
  if (domain_size == 1) return Database::FromCounts({n});
  absl::StatusOr<ConsistentPolytope> base =
      ConsistentPolytope::Create(domain_size, 1.0);
  if (!base.ok()) return base.status();
  WalkConfig walk;
  walk.chains = 1;
  absl::StatusOr<std::vector<FractionalHistogram>> f =
      SampleUniform(*base, 1, walk, rng);
  if (!f.ok()) return f.status();
  return DrawDatabase(f->front().weights, n, rng);
}

absl::StatusOr<std::unique_ptr<DatabaseSampler>> DatabaseSampler::Create(
    size_t domain_size, uint64_t seed, WalkConfig walk) {
  if (domain_size < 1) return absl::InvalidArgumentError("empty domain");
  std::unique_ptr<DatabaseSampler> sampler(
      new DatabaseSampler(domain_size, seed));
  absl::StatusOr<ConsistentPolytope> base =
      ConsistentPolytope::Create(domain_size, 1.0);
  if (!base.ok()) return base.status();
  sampler->base_ = *std::move(base);
  if (walk.thinning == 0) {
    walk.thinning =
        kDatabaseSamplerThinning * static_cast<int64_t>(domain_size);
  }
  const WalkConfig cfg = walk.Resolved(domain_size);
  absl::StatusOr<WalkGeometry> geometry =
      PrepareWalk(*sampler->base_, cfg, DeriveSeed(seed, 0xdb));
  if (!geometry.ok()) return geometry.status();
  sampler->chain_ = std::make_unique<HitAndRunChain>(
      *sampler->base_,
      std::make_shared<const WalkGeometry>(*std::move(geometry)), cfg.thinning,
      DeriveSeed(seed, 0xdb, 1));
  sampler->chain_->Advance(cfg.burn_in);
  return sampler;
}

absl::StatusOr<FractionalHistogram> DatabaseSampler::NextHistogram() {
  return chain_->Next();
}

absl::StatusOr<Database> DatabaseSampler::NextDatabase(int64_t n) {
  absl::StatusOr<FractionalHistogram> f = NextHistogram();
  if (!f.ok()) return f.status();
  return DrawDatabase(f->weights, n, rng_);
}

}  // namespace median_mechanism
