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

// The median mechanism over an explicitly enumerated consistent set of
// size-m databases.

#ifndef MEDIAN_MECHANISM_MEDIAN_BASIC_H_
#define MEDIAN_MECHANISM_MEDIAN_BASIC_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "median_mechanism/core.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/transcript.h"

namespace median_mechanism {

inline constexpr int64_t kDefaultEnumerationCap = 10'000'000;

// Number of size-m multisets over d elements, C(d + m - 1, m), saturating at
// INT64_MAX.
int64_t MultisetCount(size_t domain_size, int64_t m);

// A list of size-m count histograms stored row-major in one flat buffer.
class ConsistentSetBasic {
 public:
  // Every size-m multiset over the domain exactly once, in lexicographically
  // decreasing order of the count vector. Fails when the count exceeds `cap`.
  static absl::StatusOr<ConsistentSetBasic> EnumerateAll(
      size_t domain_size, int64_t m, int64_t cap = kDefaultEnumerationCap);
  static absl::StatusOr<ConsistentSetBasic> FromMembers(
      size_t domain_size, int64_t m,
      const std::vector<std::vector<int64_t>>& members);

  size_t domain_size() const { return domain_size_; }
  int64_t m() const { return m_; }
  int64_t size() const {
    return static_cast<int64_t>(counts_.size() / domain_size_);
  }
  bool empty() const { return counts_.empty(); }
  uint16_t count(int64_t member, size_t j) const {
    return counts_[static_cast<size_t>(member) * domain_size_ + j];
  }
  std::vector<int64_t> Member(int64_t member) const;
  bool Contains(const std::vector<int64_t>& counts) const;

  // Number of satisfied rows of each member, so f(S) = SatisfiedCount / m.
  std::vector<int64_t> SatisfiedCounts(const Predicate& f) const;

  // Keeps the members with |f(S) - center| <= half_width.
  void Filter(const Predicate& f, double center, double half_width);

 private:
  ConsistentSetBasic(size_t domain_size, int64_t m)
      : domain_size_(domain_size), m_(m) {}

  size_t domain_size_;
  int64_t m_;
  std::vector<uint16_t> counts_;
};

// Mean of exp(-|f(D) - f(S)| / eps) over S in C.
absl::StatusOr<double> ComputeR(const Database& db, const Predicate& f,
                                const ConsistentSetBasic& c, double eps);

// Lower median of f over C: the value at ascending index floor((|C|-1)/2).
absl::StatusOr<double> MedianOf(const Predicate& f,
                                const ConsistentSetBasic& c);

// The size-m database closest to D: counts m * D / n rounded by largest
// remainder, ties to the lower index.
std::vector<int64_t> NearestScaledDatabase(const Database& db, int64_t m);

struct BasicSessionOptions {
  NoiseOverrides overrides;
  int64_t enumeration_cap = kDefaultEnumerationCap;
};

// One interactive run. Not thread-safe; independent sessions share nothing.
class BasicSession {
 public:
  // Multiplier of m ln|X| in the hard-answer cap.
  static constexpr double kHardCapMultiplier = 20.0;

  static absl::StatusOr<BasicSession> Create(const Database& db,
                                             const MechanismParams& params,
                                             uint64_t seed,
                                             BasicSessionOptions options = {});

  // Answers one query. Returns ResourceExhausted when this query trips the
  // hard cap (the session is then failed and the query gets no answer), and
  // FailedPrecondition once failed or after k answers.
  absl::StatusOr<TranscriptEntry> AnswerQuery(const Predicate& f);

  const Transcript& transcript() const { return transcript_; }
  const ConsistentSetBasic& consistent_set() const { return set_; }
  const MechanismParams& params() const { return params_; }
  bool failed() const { return transcript_.failed(); }

 private:
  BasicSession(Database db, MechanismParams params, ConsistentSetBasic set,
               SessionNoise noise)
      : db_(std::move(db)),
        params_(params),
        set_(std::move(set)),
        noise_(std::move(noise)) {}

  Database db_;
  MechanismParams params_;
  ConsistentSetBasic set_;
  SessionNoise noise_;
  Transcript transcript_;
  std::vector<int64_t> witness_;
  int64_t hard_count_ = 0;
};

// Feeds queries from `source` until it is exhausted, k answers were given, or
// the session fails.
absl::StatusOr<Transcript> RunBasicSession(const Database& db,
                                           QuerySource& source,
                                           const MechanismParams& params,
                                           uint64_t seed,
                                           BasicSessionOptions options = {});

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_MEDIAN_BASIC_H_
