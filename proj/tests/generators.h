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

// Hand-rolled random generators for property tests.

#ifndef MEDIAN_MECHANISM_TESTS_GENERATORS_H_
#define MEDIAN_MECHANISM_TESTS_GENERATORS_H_

#include <cstdint>
#include <vector>

#include "median_mechanism/core.h"
#include "median_mechanism/noise.h"

namespace median_mechanism::gen {

inline int64_t UniformInt(Rng& rng, int64_t lo, int64_t hi) {
  return lo + static_cast<int64_t>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

// n rows spread over the domain by uniform element draws.
inline Database RandomDatabase(Rng& rng, size_t domain_size, int64_t n) {
  std::vector<int64_t> counts(domain_size, 0);
  for (int64_t i = 0; i < n; ++i) {
    ++counts[static_cast<size_t>(
        UniformInt(rng, 0, static_cast<int64_t>(domain_size) - 1))];
  }
  return *Database::FromCounts(std::move(counts));
}

inline Predicate RandomPredicate(Rng& rng, size_t domain_size) {
  std::vector<uint8_t> bits(domain_size);
  for (uint8_t& b : bits) b = static_cast<uint8_t>(rng() & 1);
  return *Predicate::FromIndicator(std::move(bits));
}

}  // namespace median_mechanism::gen

#endif  // MEDIAN_MECHANISM_TESTS_GENERATORS_H_
