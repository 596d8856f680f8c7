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
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "median_mechanism/core.h"
#include "median_mechanism/oracle.h"
#include "median_mechanism/transcript.h"
#include "generators.h"

namespace median_mechanism {
namespace {

MechanismParams SmallParams(int64_t k, int64_t n, size_t d, int64_t m,
                            double eps = 0.5) {
  return *DeriveParams(1.0, eps, k, n, d, ParamConstants{1.0, 1.0, 4.0},
                       ParamMode::kScaled, m);
}

BasicSessionOptions Injected(std::vector<QueryDraws> draws) {
  BasicSessionOptions options;
  options.overrides.unsafe_testing = true;
  options.overrides.injected = std::move(draws);
  return options;
}

TEST(MultisetCountTest, StarsAndBars) {
  EXPECT_EQ(MultisetCount(3, 2), 6);
  EXPECT_EQ(MultisetCount(4, 3), 20);
  EXPECT_EQ(MultisetCount(4, 9), 220);
  EXPECT_EQ(MultisetCount(2, 1), 2);
  EXPECT_EQ(MultisetCount(200, 200), std::numeric_limits<int64_t>::max());
}

TEST(ConsistentSetBasicTest, EnumeratesEveryMultisetOnce) {
  for (size_t d = 1; d <= 5; ++d) {
    for (int64_t m = 1; m <= 4; ++m) {
      absl::StatusOr<ConsistentSetBasic> c =
          ConsistentSetBasic::EnumerateAll(d, m);
      ASSERT_TRUE(c.ok()) << c.status();
      ASSERT_EQ(c->size(), MultisetCount(d, m));
      const auto expected = oracle::EnumerateCountVectors(d, m);
      ASSERT_EQ(static_cast<int64_t>(expected.size()), c->size());
      for (int64_t i = 0; i < c->size(); ++i) {
        const std::vector<int64_t> member = c->Member(i);
        int64_t total = 0;
        for (int64_t x : member) total += x;
        EXPECT_EQ(total, m);
        EXPECT_TRUE(std::find(expected.begin(), expected.end(), member) !=
                    expected.end());
        if (i > 0) EXPECT_GT(c->Member(i - 1), member);
      }
    }
  }
}

TEST(ConsistentSetBasicTest, CapSuggestsEfficientVariant) {
  absl::StatusOr<ConsistentSetBasic> c =
      ConsistentSetBasic::EnumerateAll(4, 9, 100);
  ASSERT_EQ(c.status().code(), absl::StatusCode::kResourceExhausted);
  EXPECT_NE(c.status().message().find("median-efficient"), std::string::npos);
}

TEST(ConsistentSetBasicTest, FilterKeepsClosedBand) {
  ConsistentSetBasic c = *ConsistentSetBasic::EnumerateAll(2, 4);
  // f(S) in {0, .25, .5, .75, 1}; the band [0.24, 0.51] keeps two members.
  c.Filter(Predicate::Singleton(2, 0), 0.375, 0.135);
  ASSERT_EQ(c.size(), 2);
  EXPECT_TRUE(c.Contains({1, 3}));
  EXPECT_TRUE(c.Contains({2, 2}));
  EXPECT_FALSE(c.Contains({3, 1}));
}

TEST(ComputeRTest, HandComputedTwoElementCase) {
  const Database db = *Database::FromCounts({1, 1});
  const ConsistentSetBasic c = *ConsistentSetBasic::EnumerateAll(2, 1);
  EXPECT_NEAR(*ComputeR(db, Predicate::Singleton(2, 0), c, 0.5),
              0.36787944117144233, 1e-15);
  EXPECT_NEAR(*ComputeR(db, Predicate::AllOnes(2), c, 0.5), 1.0, 1e-15);
}

TEST(ComputeRTest, AgreesWithReferenceOnRandomInputs) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t d = static_cast<size_t>(gen::UniformInt(rng, 2, 5));
    const int64_t m = gen::UniformInt(rng, 1, 4);
    const int64_t n = gen::UniformInt(rng, 1, 9);
    const double eps = 0.05 + 0.9 * UniformOpen01(rng);
    const Database db = gen::RandomDatabase(rng, d, n);
    const Predicate f = gen::RandomPredicate(rng, d);
    ConsistentSetBasic c = *ConsistentSetBasic::EnumerateAll(d, m);
    c.Filter(gen::RandomPredicate(rng, d), UniformOpen01(rng), 0.3);
    if (c.empty()) continue;
    std::vector<std::vector<int64_t>> members;
    for (int64_t i = 0; i < c.size(); ++i) members.push_back(c.Member(i));
    EXPECT_NEAR(*ComputeR(db, f, c, eps),
                oracle::ReferenceR(db.counts(), f, members, m, eps), 1e-12);
  }
}

TEST(ComputeRTest, EmptySetIsAnError) {
  ConsistentSetBasic c = *ConsistentSetBasic::EnumerateAll(2, 1);
  c.Filter(Predicate::AllOnes(2), 0.0, 0.1);
  ASSERT_TRUE(c.empty());
  EXPECT_FALSE(ComputeR(*Database::FromCounts({1, 0}),
                        Predicate::AllOnes(2), c, 0.5)
                   .ok());
  EXPECT_FALSE(MedianOf(Predicate::AllOnes(2), c).ok());
}

TEST(MedianOfTest, TakesLowerMedian) {
  const ConsistentSetBasic c = *ConsistentSetBasic::FromMembers(
      2, 2, {{2, 0}, {1, 1}, {0, 2}, {2, 0}});
  // Values 1, .5, 0, 1 sort to 0, .5, 1, 1; the lower median is index 1.
  EXPECT_EQ(*MedianOf(Predicate::Singleton(2, 0), c), 0.5);
  const ConsistentSetBasic pair =
      *ConsistentSetBasic::FromMembers(2, 1, {{1, 0}, {0, 1}});
  EXPECT_EQ(*MedianOf(Predicate::Singleton(2, 0), pair), 0.0);
}

TEST(MedianOfTest, SplitsTheSetProperty) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t d = static_cast<size_t>(gen::UniformInt(rng, 2, 5));
    const ConsistentSetBasic c =
        *ConsistentSetBasic::EnumerateAll(d, gen::UniformInt(rng, 1, 5));
    const Predicate f = gen::RandomPredicate(rng, d);
    const double med = *MedianOf(f, c);
    int64_t at_most = 0;
    int64_t at_least = 0;
    for (int64_t s : c.SatisfiedCounts(f)) {
      const double v = static_cast<double>(s) / static_cast<double>(c.m());
      at_most += v <= med;
      at_least += v >= med;
    }
    EXPECT_GE(2 * at_most, c.size());
    EXPECT_GE(2 * at_least, c.size());
  }
}

TEST(NearestScaledDatabaseTest, LargestRemainder) {
  EXPECT_EQ(NearestScaledDatabase(*Database::FromCounts({5, 3, 2}), 4),
            (std::vector<int64_t>{2, 1, 1}));
  EXPECT_EQ(NearestScaledDatabase(*Database::FromCounts({1, 1}), 1).size(), 2u);
}

TEST(ThresholdTest, DistributionForCoarseGap) {
  EXPECT_EQ(ThresholdSupportMax(0.15), 1);
  EXPECT_NEAR(ThresholdProbability(0.15, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(ThresholdProbability(0.15, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(ThresholdProbability(0.15, 2), 0.0);
}

TEST(ThresholdTest, DistributionForFineGap) {
  EXPECT_EQ(ThresholdSupportMax(0.03), 5);
  double total = 0;
  for (int64_t j = 0; j <= 5; ++j) {
    EXPECT_NEAR(ThresholdProbability(0.03, j),
                std::ldexp(32.0, -static_cast<int>(j)) / 63.0, 1e-15);
    total += ThresholdProbability(0.03, j);
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(ThresholdTest, InverseCdfMatchesProbabilities) {
  Rng rng(2);
  std::vector<int64_t> hist(6, 0);
  const int draws = 630000;
  for (int i = 0; i < draws; ++i) {
    const ThresholdDraw t = SampleThreshold(0.03, rng);
    ASSERT_GE(t.j, 0);
    ASSERT_LE(t.j, 5);
    ASSERT_NEAR(t.t, 0.75 + 0.03 * t.j, 1e-15);
    ++hist[t.j];
  }
  for (int64_t j = 0; j <= 5; ++j) {
    const double p = ThresholdProbability(0.03, j);
    const double sd = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(static_cast<double>(hist[j]) / draws, p, 5 * sd);
  }
}

TEST(ThresholdTest, StaysWithinQuarterBand) {
  for (double gamma : {1e-9, 1e-4, 0.01, 0.1, 0.15, 0.2, 5.0}) {
    for (double u : {1e-12, 0.3, 0.5, 0.999, 1 - 1e-12}) {
      const ThresholdDraw t = ThresholdFromUniform(gamma, u);
      EXPECT_GE(t.t, 0.75);
      EXPECT_LE(t.t, 0.9);
    }
  }
  EXPECT_EQ(ThresholdFromUniform(5.0, 0.99).t, 0.75);
}

TEST(HardQueryCapTest, CeilOfMultiple) {
  EXPECT_EQ(HardQueryCap(20, 1, 2), 14);
  EXPECT_EQ(HardQueryCap(40, 3, 8), 250);
}

TEST(OverridesTest, RequireUnsafeFlag) {
  NoiseOverrides o;
  o.zero_noise = true;
  EXPECT_EQ(ValidateOverrides(o).code(), absl::StatusCode::kFailedPrecondition);
  o.unsafe_testing = true;
  EXPECT_TRUE(ValidateOverrides(o).ok());

  BasicSessionOptions options;
  options.overrides.zero_noise = true;
  EXPECT_FALSE(BasicSession::Create(*Database::FromCounts({1, 1}),
                                    SmallParams(5, 2, 2, 1), 1, options)
                   .ok());
}

TEST(BasicSessionTest, RejectsMismatchedParams) {
  EXPECT_FALSE(BasicSession::Create(*Database::FromCounts({1, 2}),
                                    SmallParams(5, 2, 2, 1), 1)
                   .ok());
  EXPECT_FALSE(BasicSession::Create(*Database::FromCounts({1, 1, 0}),
                                    SmallParams(5, 2, 2, 1), 1)
                   .ok());
}

TEST(BasicSessionTest, HardQueryFiltersAndEmptySetForcesHard) {
  const Database db = *Database::FromCounts({1, 1});
  BasicSession s = *BasicSession::Create(
      db, SmallParams(5, 2, 2, 1), 3,
      Injected({{0.5, 0.0, 0.0}, {0.5, 1e6, 0.25}}));
  const TranscriptEntry first = *s.AnswerQuery(Predicate::Singleton(2, 0));
  EXPECT_EQ(first.d, Classification::kHard);
  EXPECT_NEAR(first.r, std::exp(-1.0), 1e-15);
  EXPECT_EQ(first.a, 0.5);
  EXPECT_EQ(first.set_size_before, 2);
  EXPECT_EQ(first.set_size_after, 0);
  EXPECT_EQ(first.hard_count, 1);
  EXPECT_TRUE(s.transcript().witness_evicted);

  const TranscriptEntry second = *s.AnswerQuery(Predicate::Singleton(2, 0));
  EXPECT_TRUE(second.forced_hard);
  EXPECT_EQ(second.d, Classification::kHard);
  EXPECT_EQ(second.r, 0.0);
  EXPECT_EQ(second.hard_count, 2);
}

TEST(BasicSessionTest, EasyQueryReleasesLowerMedian) {
  const Database db = *Database::FromCounts({2, 0});
  const MechanismParams params = SmallParams(5, 2, 2, 1);
  BasicSession s =
      *BasicSession::Create(db, params, 3, Injected({{0.5, 1e6, 0.0}}));
  const TranscriptEntry e = *s.AnswerQuery(Predicate::Singleton(2, 0));
  EXPECT_EQ(e.d, Classification::kEasy);
  EXPECT_EQ(e.a, 0.0);
  EXPECT_EQ(e.set_size_after, 2);
  EXPECT_EQ(e.hard_count, 0);
  EXPECT_NEAR(e.r, (1 + std::exp(-2.0)) / 2, 1e-15);
  EXPECT_NEAR(e.r_hat - e.r,
              1e6 * 2.0 / (params.eps * 2.0 * params.alpha_prime), 1e-6);
}

TEST(BasicSessionTest, BudgetAndFailureStopTheSession) {
  const Database db = *Database::FromCounts({1, 1});
  const MechanismParams params = SmallParams(20, 2, 2, 1);
  std::vector<QueryDraws> draws(20, QueryDraws{0.5, -1e9, 0.0});
  BasicSession s = *BasicSession::Create(db, params, 1, Injected(draws));
  ASSERT_EQ(s.transcript().hard_cap, 14);
  for (int i = 0; i < 14; ++i) {
    ASSERT_TRUE(s.AnswerQuery(Predicate::AllOnes(2)).ok());
  }
  const absl::StatusOr<TranscriptEntry> over =
      s.AnswerQuery(Predicate::AllOnes(2));
  EXPECT_EQ(over.status().code(), absl::StatusCode::kResourceExhausted);
  EXPECT_TRUE(s.failed());
  EXPECT_EQ(s.transcript().failure, FailureCause::kHardCap);
  EXPECT_EQ(s.transcript().failure_index, 15);
  EXPECT_EQ(s.transcript().failure_hard_count, 15);
  EXPECT_EQ(s.transcript().entries.size(), 14u);
  EXPECT_EQ(s.AnswerQuery(Predicate::AllOnes(2)).status().code(),
            absl::StatusCode::kFailedPrecondition);

  BasicSession t = *BasicSession::Create(db, SmallParams(2, 2, 2, 1), 1);
  ASSERT_TRUE(t.AnswerQuery(Predicate::AllOnes(2)).ok());
  ASSERT_TRUE(t.AnswerQuery(Predicate::AllOnes(2)).ok());
  EXPECT_EQ(t.AnswerQuery(Predicate::AllOnes(2)).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

std::string Jsonl(const Transcript& t, bool release) {
  std::ostringstream out;
  WriteTranscriptJsonl(t, release, out);
  return out.str();
}

TEST(BasicSessionTest, SeedDeterminesTranscriptBytes) {
  Rng rng(12);
  const Database db = gen::RandomDatabase(rng, 4, 30);
  const MechanismParams params = SmallParams(25, 30, 4, 3, 0.3);
  std::vector<Predicate> queries;
  for (int i = 0; i < 25; ++i) queries.push_back(gen::RandomPredicate(rng, 4));
  FixedQuerySource a(queries);
  FixedQuerySource b(queries);
  FixedQuerySource c(queries);
  const Transcript ta = *RunBasicSession(db, a, params, 77);
  const Transcript tb = *RunBasicSession(db, b, params, 77);
  const Transcript tc = *RunBasicSession(db, c, params, 78);
  EXPECT_EQ(Jsonl(ta, false), Jsonl(tb, false));
  EXPECT_NE(Jsonl(ta, false), Jsonl(tc, false));
}

TEST(BasicSessionTest, TranscriptInvariantsProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const size_t d = static_cast<size_t>(gen::UniformInt(rng, 2, 5));
    const int64_t n = gen::UniformInt(rng, 5, 60);
    const int64_t k = gen::UniformInt(rng, 2, 30);
    const Database db = gen::RandomDatabase(rng, d, n);
    const MechanismParams params =
        SmallParams(k, n, d, gen::UniformInt(rng, 1, 3),
                    0.1 + 0.8 * UniformOpen01(rng));
    std::vector<Predicate> queries;
    for (int64_t i = 0; i < k; ++i) {
      queries.push_back(gen::RandomPredicate(rng, d));
    }
    FixedQuerySource source(queries);
    const Transcript t = *RunBasicSession(db, source, params, rng());
    int64_t hard = 0;
    int64_t size = MultisetCount(d, params.m);
    for (const TranscriptEntry& e : t.entries) {
      EXPECT_EQ(e.set_size_before, size);
      EXPECT_LE(e.set_size_after, e.set_size_before);
      EXPECT_GE(e.r, 0.0);
      EXPECT_LE(e.r, 1.0);
      EXPECT_GE(e.t, 0.75);
      EXPECT_LE(e.t, 0.9);
      if (e.d == Classification::kHard) {
        ++hard;
      } else {
        EXPECT_EQ(e.set_size_after, e.set_size_before);
        EXPECT_GE(e.r_hat, e.t);
        // Easy answers sit on the 1/m lattice.
        const double scaled = e.a * static_cast<double>(params.m);
        EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
      }
      EXPECT_EQ(e.hard_count, hard);
      EXPECT_LE(e.hard_count, t.hard_cap);
      size = e.set_size_after;
    }
  }
}

TEST(TranscriptJsonTest, ReleaseViewHasOnlyPublicFields) {
  TranscriptEntry e;
  e.index = 3;
  e.query = *Predicate::FromBitString("0110");
  e.d = Classification::kHard;
  e.a = 0.25;
  e.r = 0.5;
  const nlohmann::json release = EntryToJson(e, true);
  EXPECT_EQ(release.size(), 4u);
  EXPECT_EQ(release["i"], 3);
  EXPECT_EQ(release["query"], "0110");
  EXPECT_EQ(release["d"], "hard");
  EXPECT_EQ(release["a"], 0.25);
  const nlohmann::json full = EntryToJson(e, false);
  EXPECT_EQ(full["r"], 0.5);
  EXPECT_TRUE(full.contains("r_hat"));
}

TEST(TranscriptJsonTest, FailureLineIsAppended) {
  Transcript t;
  t.failure = FailureCause::kHardCap;
  t.failure_index = 7;
  t.failure_hard_count = 15;
  const nlohmann::json last = nlohmann::json::parse(Jsonl(t, true));
  EXPECT_EQ(last["failure"], "hard-cap");
  EXPECT_EQ(last["i"], 7);
  EXPECT_EQ(last["hard_count"], 15);
}

}  // namespace
}  // namespace median_mechanism
