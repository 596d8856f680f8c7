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

#include "median_mechanism/median_basic.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "median_mechanism/core.h"
#include "median_mechanism/transcript.h"

namespace median_mechanism {

int64_t MultisetCount(size_t domain_size, int64_t m) {
  if (domain_size == 0) return m == 0 ? 1 : 0;
  // C(d - 1 + m, d - 1), built up multiplicatively so each step is exact.
  const int64_t r = static_cast<int64_t>(domain_size) - 1;
  const int64_t k = std::min(r, m);
  const int64_t top = r + m;
  unsigned __int128 value = 1;
  for (int64_t i = 1; i <= k; ++i) {
    value = value * static_cast<unsigned __int128>(top - k + i) /
            static_cast<unsigned __int128>(i);
    if (value > static_cast<unsigned __int128>(
                    std::numeric_limits<int64_t>::max())) {
      return std::numeric_limits<int64_t>::max();
    }
  }
  return static_cast<int64_t>(value);
}

absl::StatusOr<ConsistentSetBasic> ConsistentSetBasic::EnumerateAll(
    size_t domain_size, int64_t m, int64_t cap) {
  if (domain_size < 1) {
    return absl::InvalidArgumentError("domain must be nonempty");
  }
  if (m < 0 || m > std::numeric_limits<uint16_t>::max()) {
    return absl::InvalidArgumentError(
        absl::StrCat("m = ", m, " is outside the enumerable range"));
  }
  const int64_t total = MultisetCount(domain_size, m);
  if (total > cap) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "enumerating ", total == std::numeric_limits<int64_t>::max()
                            ? std::string("more than 2^63")
                            : absl::StrCat(total),
        " databases of size ", m, " exceeds the cap of ", cap,
        "; use the sampling-based mechanism (median-efficient) instead"));
  }
  ConsistentSetBasic set(domain_size, m);
  set.counts_.reserve(static_cast<size_t>(total) * domain_size);
  std::vector<uint16_t> current(domain_size, 0);
  current[0] = static_cast<uint16_t>(m);
  while (true) {
    set.counts_.insert(set.counts_.end(), current.begin(), current.end());
    // Move one unit from the rightmost nonzero entry before the last slot to
    // its right neighbor, gathering the tail there.
    size_t pos = domain_size;
    for (size_t j = domain_size - 1; j-- > 0;) {
      if (current[j] > 0) {
        pos = j;
        break;
      }
    }
    if (pos == domain_size) break;
    const uint16_t tail = current[domain_size - 1];
    current[domain_size - 1] = 0;
    --current[pos];
    current[pos + 1] = static_cast<uint16_t>(tail + 1);
  }
  return set;
}

absl::StatusOr<ConsistentSetBasic> ConsistentSetBasic::FromMembers(
    size_t domain_size, int64_t m,
    const std::vector<std::vector<int64_t>>& members) {
  if (domain_size < 1) {
    return absl::InvalidArgumentError("domain must be nonempty");
  }
  ConsistentSetBasic set(domain_size, m);
  for (const std::vector<int64_t>& member : members) {
    if (member.size() != domain_size) {
      return absl::InvalidArgumentError("member has the wrong dimension");
    }
    int64_t sum = 0;
    for (int64_t c : member) {
      if (c < 0) return absl::InvalidArgumentError("negative member count");
      sum += c;
    }
    if (sum != m) {
      return absl::InvalidArgumentError(
          absl::StrCat("member has size ", sum, ", expected ", m));
    }
    for (int64_t c : member) set.counts_.push_back(static_cast<uint16_t>(c));
  }
  return set;
}

std::vector<int64_t> ConsistentSetBasic::Member(int64_t member) const {
  std::vector<int64_t> out(domain_size_);
  for (size_t j = 0; j < domain_size_; ++j) out[j] = count(member, j);
  return out;
}

bool ConsistentSetBasic::Contains(const std::vector<int64_t>& counts) const {
  if (counts.size() != domain_size_) return false;
  for (int64_t i = 0; i < size(); ++i) {
    bool same = true;
    for (size_t j = 0; j < domain_size_ && same; ++j) {
      same = count(i, j) == counts[j];
    }
    if (same) return true;
  }
  return false;
}

std::vector<int64_t> ConsistentSetBasic::SatisfiedCounts(
    const Predicate& f) const {
  std::vector<int64_t> out(static_cast<size_t>(size()), 0);
  for (int64_t i = 0; i < size(); ++i) {
    int64_t s = 0;
    for (size_t j = 0; j < domain_size_; ++j) {
      if (f.Contains(j)) s += count(i, j);
    }
    out[static_cast<size_t>(i)] = s;
  }
  return out;
}

void ConsistentSetBasic::Filter(const Predicate& f, double center,
                                double half_width) {
  std::vector<uint16_t> kept;
  const double md = static_cast<double>(m_);
  const std::vector<int64_t> satisfied = SatisfiedCounts(f);
  for (int64_t i = 0; i < size(); ++i) {
    const double value = static_cast<double>(satisfied[i]) / md;
    if (std::abs(value - center) <= half_width) {
      auto begin = counts_.begin() + i * static_cast<int64_t>(domain_size_);
      kept.insert(kept.end(), begin, begin + domain_size_);
    }
  }
  counts_ = std::move(kept);
}

absl::StatusOr<double> ComputeR(const Database& db, const Predicate& f,
                                const ConsistentSetBasic& c, double eps) {
  if (c.empty()) {
    return absl::FailedPreconditionError("r is undefined on an empty set");
  }
  if (f.domain_size() != c.domain_size()) {
    return absl::InvalidArgumentError("predicate and set dimensions differ");
  }
  absl::StatusOr<double> truth = EvaluateQuery(f, db);
  if (!truth.ok()) return truth.status();
  // f(S) takes only m + 1 values, so tabulate the integrand once.
  const int64_t m = c.m();
  std::vector<double> weight(static_cast<size_t>(m) + 1);
  for (int64_t s = 0; s <= m; ++s) {
    const double value =
        m == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(m);
    weight[static_cast<size_t>(s)] = std::exp(-std::abs(*truth - value) / eps);
  }
  double sum = 0.0;
  for (int64_t s : c.SatisfiedCounts(f)) sum += weight[static_cast<size_t>(s)];
  return sum / static_cast<double>(c.size());
}

absl::StatusOr<double> MedianOf(const Predicate& f,
                                const ConsistentSetBasic& c) {
  if (c.empty()) {
    return absl::FailedPreconditionError("median is undefined on an empty set");
  }
  if (f.domain_size() != c.domain_size()) {
    return absl::InvalidArgumentError("predicate and set dimensions differ");
  }
  const int64_t m = c.m();
  std::vector<int64_t> histogram(static_cast<size_t>(m) + 1, 0);
  for (int64_t s : c.SatisfiedCounts(f)) ++histogram[static_cast<size_t>(s)];
  const int64_t target = (c.size() - 1) / 2;
  int64_t seen = 0;
  for (int64_t s = 0; s <= m; ++s) {
    seen += histogram[static_cast<size_t>(s)];
    if (seen > target) {
      return m == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(m);
    }
  }
  return absl::InternalError("median scan fell off the histogram");
}

std::vector<int64_t> NearestScaledDatabase(const Database& db, int64_t m) {
  const size_t d = db.domain_size();
  std::vector<int64_t> out(d, 0);
  std::vector<std::pair<int64_t, size_t>> remainders;
  int64_t assigned = 0;
  for (size_t j = 0; j < d; ++j) {
    // Exact integer division of m * count by n.
    const __int128 scaled = static_cast<__int128>(m) * db.count(j);
    out[j] = static_cast<int64_t>(scaled / db.size());
    remainders.push_back({static_cast<int64_t>(scaled % db.size()), j});
    assigned += out[j];
  }
  std::stable_sort(
      remainders.begin(), remainders.end(),
      [](const auto& x, const auto& y) { return x.first > y.first; });
  for (size_t i = 0; assigned < m; ++i, ++assigned) {
    ++out[remainders[i % d].second];
  }
  return out;
}

absl::StatusOr<BasicSession> BasicSession::Create(const Database& db,
                                                  const MechanismParams& params,
                                                  uint64_t seed,
                                                  BasicSessionOptions options) {
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
  absl::StatusOr<ConsistentSetBasic> set = ConsistentSetBasic::EnumerateAll(
      db.domain_size(), params.m, options.enumeration_cap);
  if (!set.ok()) return set.status();
  BasicSession session(db, params, *std::move(set),
                       SessionNoise(seed, std::move(options.overrides)));
  session.transcript_.mechanism = "median-basic";
  session.transcript_.hard_cap =
      HardQueryCap(kHardCapMultiplier, params.m, params.domain_size);
  session.witness_ = NearestScaledDatabase(db, params.m);
  return session;
}

absl::StatusOr<TranscriptEntry> BasicSession::AnswerQuery(const Predicate& f) {
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
  TranscriptEntry e;
  e.index = static_cast<int64_t>(transcript_.entries.size()) + 1;
  e.query = f;
  e.truth = *truth;
  e.set_size_before = set_.size();

  const ThresholdDraw threshold = ThresholdFromUniform(params_.gamma,
                                                       draws.threshold_u);
  e.t = threshold.t;
  e.j = threshold.j;
  if (set_.empty()) {
    e.forced_hard = true;
    e.r = 0.0;
  } else {
    absl::StatusOr<double> r = ComputeR(db_, f, set_, params_.eps);
    if (!r.ok()) return r.status();
    e.r = *r;
  }
  e.r_hat = e.r + draws.r_noise * 2.0 / (params_.eps * n * params_.alpha_prime);

  if (!e.forced_hard && e.r_hat >= e.t) {
    e.d = Classification::kEasy;
    absl::StatusOr<double> median = MedianOf(f, set_);
    if (!median.ok()) return median.status();
    e.a = *median;
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
    set_.Filter(f, e.a, params_.eps / 50.0);
    if (!transcript_.witness_evicted && !set_.Contains(witness_)) {
      transcript_.witness_evicted = true;
    }
  }
  e.set_size_after = set_.size();
  transcript_.entries.push_back(e);
  return e;
}

absl::StatusOr<Transcript> RunBasicSession(const Database& db,
                                           QuerySource& source,
                                           const MechanismParams& params,
                                           uint64_t seed,
                                           BasicSessionOptions options) {
  absl::StatusOr<BasicSession> session =
      BasicSession::Create(db, params, seed, std::move(options));
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

}  // namespace median_mechanism
