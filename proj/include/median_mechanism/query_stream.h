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

// Query-stream generators for experiments: random predicates, a cycling
// singleton sweep, and an adaptive quantile-bisection adversary.

#ifndef MEDIAN_MECHANISM_QUERY_STREAM_H_
#define MEDIAN_MECHANISM_QUERY_STREAM_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "median_mechanism/core.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/transcript.h"

namespace median_mechanism {

enum class QueryStreamKind { kRandom, kSingletonSweep, kAdaptiveBisection };

absl::string_view QueryStreamName(QueryStreamKind kind);
absl::StatusOr<QueryStreamKind> ParseQueryStreamKind(absl::string_view name);

// Each element is included independently with probability 1/2.
class RandomQueryStream : public QuerySource {
 public:
  RandomQueryStream(size_t domain_size, uint64_t seed)
      : domain_size_(domain_size), rng_(seed) {}

  std::optional<Predicate> Next(
      std::span<const ReleasedAnswer> history) override;

 private:
  size_t domain_size_;
  Rng rng_;
};

// e_0, e_1, ..., e_{|X|-1}, then around again.
class SingletonSweepStream : public QuerySource {
 public:
  explicit SingletonSweepStream(size_t domain_size)
      : domain_size_(domain_size) {}

  std::optional<Predicate> Next(
      std::span<const ReleasedAnswer> history) override;

 private:
  size_t domain_size_;
  size_t next_ = 0;
};

// Binary search for quantiles of D along the element order using prefix
// predicates {0, ..., t-1}. Each answer >= q halves the candidate range of t
// from above, each answer < q from below. When the range closes the search
// restarts on the next dyadic quantile: 1/2, 1/4, 3/4, 1/8, 3/8, ...
class AdaptiveBisectionStream : public QuerySource {
 public:
  explicit AdaptiveBisectionStream(size_t domain_size);

  std::optional<Predicate> Next(
      std::span<const ReleasedAnswer> history) override;

  // Current candidate range [lo, hi] of prefix lengths and target quantile.
  int64_t lo() const { return lo_; }
  int64_t hi() const { return hi_; }
  double quantile() const;

 private:
  void AdvanceQuantile();

  size_t domain_size_;
  int64_t lo_;
  int64_t hi_;
  int64_t pending_ = -1;  // prefix length of the outstanding query
  size_t consumed_ = 0;   // history entries already absorbed
  int64_t level_ = 1;     // quantile denominator is 2^level_
  int64_t numerator_ = 1;
};

std::unique_ptr<QuerySource> MakeQueryStream(QueryStreamKind kind,
                                             size_t domain_size,
                                             uint64_t seed);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_QUERY_STREAM_H_
