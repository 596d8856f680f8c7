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

// Pieces shared by the interactive sessions: transcripts, query sources, the
// per-query noise stream and its test-only overrides.

#ifndef MEDIAN_MECHANISM_TRANSCRIPT_H_
#define MEDIAN_MECHANISM_TRANSCRIPT_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/string_view.h"
#include "json.hpp"
#include "median_mechanism/core.h"
#include "median_mechanism/noise.h"

namespace median_mechanism {

enum class Classification { kEasy, kHard };

enum class FailureCause {
  kNone,
  // More hard answers than the structural cap allows.
  kHardCap,
  // The fractional consistent polytope lost its interior.
  kDegeneratePolytope,
};

absl::string_view ClassificationName(Classification d);
absl::string_view FailureCauseName(FailureCause cause);

// The public part of one answer: what an adaptive analyst gets to see.
struct ReleasedAnswer {
  Classification d = Classification::kEasy;
  double a = 0;
};

struct TranscriptEntry {
  int64_t index = 0;  // 1-based query number
  Predicate query = Predicate::AllZeros(1);
  Classification d = Classification::kEasy;
  double a = 0;

  // Everything below is non-private diagnostics.
  double truth = 0;  // f(D)
  double r = 0;
  double r_hat = 0;
  double t = 0;
  int64_t j = 0;
  int64_t hard_count = 0;  // including this query

  // Enumerated sessions: |C| before and after this query.
  int64_t set_size_before = -1;
  int64_t set_size_after = -1;
  // Sampled sessions: estimator standard error and pair count afterwards.
  double r_stderr = 0;
  int64_t polytope_pairs = -1;

  // The consistent set was empty, so the query was answered as hard.
  bool forced_hard = false;
};

struct Transcript {
  std::string mechanism;
  std::vector<TranscriptEntry> entries;
  int64_t hard_cap = 0;
  FailureCause failure = FailureCause::kNone;
  // Query number that triggered the failure and the hard count it reached.
  int64_t failure_index = 0;
  int64_t failure_hard_count = 0;
  // The reference database nearest to D left the consistent set at some point.
  bool witness_evicted = false;

  bool failed() const { return failure != FailureCause::kNone; }
  int64_t hard_answers() const;
  std::vector<ReleasedAnswer> Released() const;
};

// Supplies the next predicate given every answer released so far, or nullopt
// when the stream is exhausted.
class QuerySource {
 public:
  virtual ~QuerySource() = default;
  virtual std::optional<Predicate> Next(
      std::span<const ReleasedAnswer> history) = 0;
};

class FixedQuerySource : public QuerySource {
 public:
  explicit FixedQuerySource(std::vector<Predicate> queries)
      : queries_(std::move(queries)) {}

  std::optional<Predicate> Next(
      std::span<const ReleasedAnswer> history) override;

 private:
  std::vector<Predicate> queries_;
  size_t next_ = 0;
};

// The raw randomness consumed by one query, in draw order.
struct QueryDraws {
  double threshold_u = 0.5;  // uniform in (0, 1) selecting the threshold
  double r_noise = 0;        // unit Laplace, scaled into the r perturbation
  double answer_noise = 0;   // unit Laplace, scaled into a hard answer
};

// Test hooks that bypass the noise. Refused unless `unsafe_testing` is set.
struct NoiseOverrides {
  bool unsafe_testing = false;
  // Both Laplace draws become 0. The threshold draw is kept.
  bool zero_noise = false;
  // Replaces the draws of the first injected.size() queries.
  std::vector<QueryDraws> injected;

  bool active() const { return zero_noise || !injected.empty(); }
};

absl::Status ValidateOverrides(const NoiseOverrides& overrides);

// One stream per session. Every query consumes exactly three engine outputs,
// threshold first, so two sessions seeded alike see the same draws whichever
// branch they take.
class SessionNoise {
 public:
  SessionNoise(uint64_t seed, NoiseOverrides overrides)
      : rng_(seed), overrides_(std::move(overrides)) {}

  QueryDraws Next();

 private:
  Rng rng_;
  NoiseOverrides overrides_;
  size_t drawn_ = 0;
};

// Threshold grid 3/4 + j * gamma with Pr[j] proportional to 2^-j on
// {0, ..., J}, J = floor(3 / (20 gamma)).
struct ThresholdDraw {
  int64_t j = 0;
  double t = 0.75;
};

int64_t ThresholdSupportMax(double gamma);
// Inverse-CDF selection of j from one uniform.
ThresholdDraw ThresholdFromUniform(double gamma, double u);
ThresholdDraw SampleThreshold(double gamma, Rng& rng);
// Exact Pr[j] under the normalized truncated geometric.
double ThresholdProbability(double gamma, int64_t j);

// ceil(multiplier * m * ln|X|).
int64_t HardQueryCap(double multiplier, int64_t m, size_t domain_size);

// One JSON object per entry. The release view keeps only i, query, d and a.
nlohmann::json EntryToJson(const TranscriptEntry& e, bool release_view);
// Entries one per line, then a failure record if the session failed.
void WriteTranscriptJsonl(const Transcript& transcript, bool release_view,
                          std::ostream& out);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_TRANSCRIPT_H_
