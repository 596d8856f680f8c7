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

#include "median_mechanism/query_stream.h"

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "median_mechanism/core.h"

namespace median_mechanism {

absl::string_view QueryStreamName(QueryStreamKind kind) {
  switch (kind) {
    case QueryStreamKind::kRandom:
      return "random";
    case QueryStreamKind::kSingletonSweep:
      return "singleton-sweep";
    case QueryStreamKind::kAdaptiveBisection:
      return "adaptive-bisection";
  }
  return "unknown";
}

absl::StatusOr<QueryStreamKind> ParseQueryStreamKind(absl::string_view name) {
  if (name == "random") return QueryStreamKind::kRandom;
  if (name == "singleton-sweep") return QueryStreamKind::kSingletonSweep;
  if (name == "adaptive-bisection") return QueryStreamKind::kAdaptiveBisection;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown query stream '", name, "'"));
}

std::optional<Predicate> RandomQueryStream::Next(
    std::span<const ReleasedAnswer> /*history*/) {
  std::vector<uint8_t> bits(domain_size_);
  for (uint8_t& b : bits) b = static_cast<uint8_t>(rng_() >> 63);
  return *Predicate::FromIndicator(std::move(bits));
}

std::optional<Predicate> SingletonSweepStream::Next(
    std::span<const ReleasedAnswer> /*history*/) {
  Predicate f = Predicate::Singleton(domain_size_, next_);
  next_ = (next_ + 1) % domain_size_;
  return f;
}

AdaptiveBisectionStream::AdaptiveBisectionStream(size_t domain_size)
    : domain_size_(domain_size),
      lo_(1),
      hi_(static_cast<int64_t>(domain_size)) {}

double AdaptiveBisectionStream::quantile() const {
  return std::ldexp(static_cast<double>(numerator_),
                    -static_cast<int>(level_));
}

void AdaptiveBisectionStream::AdvanceQuantile() {
  numerator_ += 2;
  if (numerator_ >= (int64_t{1} << level_)) {
    ++level_;
    numerator_ = 1;
  }
  // Past 2^-60 the grid carries no new information; start over.
  if (level_ > 60) {
    level_ = 1;
    numerator_ = 1;
  }
  lo_ = 1;
  hi_ = static_cast<int64_t>(domain_size_);
}

std::optional<Predicate> AdaptiveBisectionStream::Next(
    std::span<const ReleasedAnswer> history) {
  if (pending_ >= 0 && consumed_ < history.size()) {
    const double a = history[history.size() - 1].a;
    consumed_ = history.size();
    if (a >= quantile()) {
      hi_ = pending_;
    } else {
      lo_ = pending_ + 1;
    }
    pending_ = -1;
  }
  if (lo_ >= hi_) AdvanceQuantile();
  const int64_t t = lo_ + (hi_ - lo_) / 2;
  std::vector<uint8_t> bits(domain_size_, 0);
  for (int64_t j = 0; j < t; ++j) bits[j] = 1;
  pending_ = t;
  return *Predicate::FromIndicator(std::move(bits));
}

std::unique_ptr<QuerySource> MakeQueryStream(QueryStreamKind kind,
                                             size_t domain_size,
                                             uint64_t seed) {
  switch (kind) {
    case QueryStreamKind::kRandom:
      return std::make_unique<RandomQueryStream>(domain_size, seed);
    case QueryStreamKind::kSingletonSweep:
      return std::make_unique<SingletonSweepStream>(domain_size);
    case QueryStreamKind::kAdaptiveBisection:
      return std::make_unique<AdaptiveBisectionStream>(domain_size);
  }
  return nullptr;
}

}  // namespace median_mechanism
