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

#include "median_mechanism/core.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "generators.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "median_mechanism/core_json.h"

namespace median_mechanism {
namespace {

using ::testing::HasSubstr;

TEST(DomainTest, RejectsEmptyAndDuplicateLabels) {
  EXPECT_FALSE(Domain::Create(0).ok());
  EXPECT_FALSE(Domain::Create(2, {"a", "a"}).ok());
  EXPECT_FALSE(Domain::Create(3, {"a", "b"}).ok());
  absl::StatusOr<Domain> d = Domain::Create(2, {"x", "y"});
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->size(), 2u);
  EXPECT_TRUE(d->has_labels());
}

TEST(DatabaseTest, SizeIsSumOfCounts) {
  absl::StatusOr<Database> db = Database::FromCounts({2, 1, 1, 0});
  ASSERT_TRUE(db.ok());
  EXPECT_EQ(db->size(), 4);
  EXPECT_FALSE(Database::FromCounts({0, 0}).ok());
  EXPECT_FALSE(Database::FromCounts({1, -1, 2}).ok());
  EXPECT_FALSE(Database::FromCounts({}).ok());
}

TEST(PredicateTest, BitStringRoundTrip) {
  absl::StatusOr<Predicate> f = Predicate::FromBitString("0101");
  ASSERT_TRUE(f.ok());
  EXPECT_EQ(f->ToBitString(), "0101");
  EXPECT_EQ(f->popcount(), 2u);
  EXPECT_FALSE(Predicate::FromBitString("01x").ok());
  EXPECT_FALSE(Predicate::FromIndicator({0, 2}).ok());
  EXPECT_EQ(Predicate::Singleton(3, 1).ToBitString(), "010");
}

TEST(EvaluateQueryTest, TrivialPredicates) {
  const Database db = *Database::FromCounts({3, 0, 5});
  EXPECT_EQ(*EvaluateQuery(Predicate::AllOnes(3), db), 1.0);
  EXPECT_EQ(*EvaluateQuery(Predicate::AllZeros(3), db), 0.0);
}

TEST(EvaluateQueryTest, HandCountedExample) {
  const Database db = *Database::FromCounts({2, 1, 1, 0});
  const Predicate f = *Predicate::FromBitString("1010");
  EXPECT_EQ(*EvaluateQuery(f, db), 0.75);
}

TEST(EvaluateQueryTest, DimensionMismatchIsAnError) {
  const Database db = *Database::FromCounts({1, 1});
  absl::StatusOr<double> v = EvaluateQuery(Predicate::AllOnes(3), db);
  ASSERT_FALSE(v.ok());
  EXPECT_EQ(v.status().code(), absl::StatusCode::kInvalidArgument);
}

// Exhaustive over |X| <= 6, n <= 5: values stay in [0, 1] and move by at
// most 1/n between neighbors.
TEST(EvaluateQueryTest, BoundedAndOneOverNSensitiveExhaustively) {
  for (size_t d = 1; d <= 6; ++d) {
    for (int64_t n = 1; n <= 5; ++n) {
      std::vector<std::vector<int64_t>> dbs;
      std::vector<int64_t> current(d, 0);
      // Enumerate count vectors by odometer over [0, n]^d.
      while (true) {
        int64_t sum = 0;
        for (int64_t c : current) sum += c;
        if (sum == n) dbs.push_back(current);
        size_t j = 0;
        while (j < d && ++current[j] > n) current[j++] = 0;
        if (j == d) break;
      }
      for (uint64_t mask = 0; mask < (uint64_t{1} << d); ++mask) {
        std::vector<uint8_t> bits(d);
        for (size_t j = 0; j < d; ++j) bits[j] = (mask >> j) & 1;
        const Predicate f = *Predicate::FromIndicator(bits);
        for (const auto& counts : dbs) {
          const Database db = *Database::FromCounts(counts);
          const double v = *EvaluateQuery(f, db);
          ASSERT_GE(v, 0.0);
          ASSERT_LE(v, 1.0);
          for (size_t from = 0; from < d; ++from) {
            if (counts[from] == 0) continue;
            for (size_t to = 0; to < d; ++to) {
              if (to == from) continue;
              std::vector<int64_t> moved = counts;
              --moved[from];
              ++moved[to];
              const double w = *EvaluateQuery(f, *Database::FromCounts(moved));
              ASSERT_LE(std::abs(v - w), 1.0 / n + 1e-15);
            }
          }
        }
      }
    }
  }
}

TEST(QuerySensitivityTest, IsOneOverN) {
  EXPECT_EQ(QuerySensitivity(1), 1.0);
  EXPECT_EQ(QuerySensitivity(4), 0.25);
  EXPECT_EQ(QuerySensitivity(100), 0.01);
}

TEST(ConsistentDatabaseSizeTest, MatchesHighPrecisionEvaluation) {
  // 160000 * ln 2 / 0.25 = 443614.1955... and ln 2 / 0.25 = 2.7725...
  EXPECT_EQ(ConsistentDatabaseSize(160000.0, 1.0, 0.5), 443615);
  EXPECT_EQ(ConsistentDatabaseSize(1.0, 1.0, 0.5), 3);
}

TEST(ConsistentDatabaseSizeTest, ClampsAtOne) {
  EXPECT_EQ(ConsistentDatabaseSize(1.0, std::log(2.0), 1.0), 1);
}

TEST(DeriveParamsTest, FormulasInScaledMode) {
  ParamConstants c{1.0, 2.0, 4.0};
  absl::StatusOr<MechanismParams> p =
      DeriveParams(1.0, 0.5, 8, 100, 4, c, ParamMode::kScaled);
  ASSERT_TRUE(p.ok());
  const int64_t m = static_cast<int64_t>(
      std::ceil(std::log(8.0) * std::log(2.0) / 0.25));
  EXPECT_EQ(p->m, m);
  const double alpha_prime = 1.0 / (2.0 * m * std::log(4.0));
  EXPECT_DOUBLE_EQ(p->alpha_prime, alpha_prime);
  EXPECT_DOUBLE_EQ(p->gamma,
                   4.0 / (alpha_prime * 0.5 * 100) * std::log(16.0));
  EXPECT_DOUBLE_EQ(p->n_lower_bound,
                   30.0 * std::log(16.0) * 3.0 / (alpha_prime * 0.5));
  EXPECT_FALSE(p->n_bound_holds);
}

TEST(DeriveParamsTest, PaperExactModeRejectsSmallN) {
  absl::StatusOr<MechanismParams> p =
      DeriveParams(1.0, 0.5, 8, 1000, 4, ParamConstants::Published(),
                   ParamMode::kPaperExact);
  ASSERT_FALSE(p.ok());
  EXPECT_THAT(p.status().message(), HasSubstr("infeasible"));
}

TEST(DeriveParamsTest, PaperExactModeRejectsCustomConstantsAndOverride) {
  EXPECT_FALSE(DeriveParams(1.0, 0.5, 8, 1000, 4, ParamConstants{1, 1, 1},
                            ParamMode::kPaperExact)
                   .ok());
  EXPECT_FALSE(DeriveParams(1.0, 0.5, 8, 1000, 4, ParamConstants::Published(),
                            ParamMode::kPaperExact, 3)
                   .ok());
}

TEST(DeriveParamsTest, PreconditionsAreChecked) {
  const ParamConstants c{1, 1, 1};
  EXPECT_FALSE(DeriveParams(0.0, 0.5, 8, 10, 4, c, ParamMode::kScaled).ok());
  EXPECT_FALSE(DeriveParams(1.5, 0.5, 8, 10, 4, c, ParamMode::kScaled).ok());
  EXPECT_FALSE(DeriveParams(1.0, 0.0, 8, 10, 4, c, ParamMode::kScaled).ok());
  EXPECT_FALSE(DeriveParams(1.0, 0.5, 1, 10, 4, c, ParamMode::kScaled).ok());
  EXPECT_FALSE(DeriveParams(1.0, 0.5, 8, 0, 4, c, ParamMode::kScaled).ok());
  EXPECT_FALSE(DeriveParams(1.0, 0.5, 8, 10, 1, c, ParamMode::kScaled).ok());
}

TEST(DeriveParamsTest, MOverrideFeedsTheOtherFormulas) {
  ParamConstants c{1.0, 1.0, 4.0};
  absl::StatusOr<MechanismParams> p =
      DeriveParams(1.0, 0.5, 8, 100, 4, c, ParamMode::kScaled, 7);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->m, 7);
  EXPECT_TRUE(p->m_overridden);
  EXPECT_DOUBLE_EQ(p->alpha_prime, 1.0 / (7 * std::log(4.0)));
}

TEST(DeriveParamsTest, DeterministicAndMonotone) {
  Rng rng(11);
  const ParamConstants c{3.0, 1.0, 1.0};
  for (int trial = 0; trial < 500; ++trial) {
    const double eps = 0.05 + 0.9 * UniformOpen01(rng);
    const int64_t k = gen::UniformInt(rng, 2, 1000);
    const auto a = *DeriveParams(1.0, eps, k, 50, 5, c, ParamMode::kScaled);
    const auto b = *DeriveParams(1.0, eps, k, 50, 5, c, ParamMode::kScaled);
    EXPECT_EQ(a.m, b.m);
    EXPECT_EQ(a.gamma, b.gamma);
    const auto more_k =
        *DeriveParams(1.0, eps, k + 1, 50, 5, c, ParamMode::kScaled);
    EXPECT_LE(a.m, more_k.m);
    // Halving eps at least doubles the raw value, so the ceiling moves.
    const auto finer =
        *DeriveParams(1.0, eps / 2, k, 50, 5, c, ParamMode::kScaled);
    EXPECT_LT(a.m, finer.m);
  }
}

TEST(CoreJsonTest, DatabaseAndPredicateRoundTrip) {
  const Database db = *Database::FromCounts({2, 0, 5});
  absl::StatusOr<Database> back = DatabaseFromJson(DatabaseToJson(db));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, db);
  const Predicate f = *Predicate::FromBitString("101");
  absl::StatusOr<Predicate> g = PredicateFromJson(PredicateToJson(f));
  ASSERT_TRUE(g.ok());
  EXPECT_EQ(*g, f);
}

TEST(CoreJsonTest, RejectsMismatchedLengths) {
  nlohmann::json doc = {{"domain_size", 3}, {"counts", {1, 2}}};
  EXPECT_FALSE(DatabaseFromJson(doc).ok());
  nlohmann::json pred = {{"domain_size", 2}, {"indicator", {1, 0, 1}}};
  EXPECT_FALSE(PredicateFromJson(pred).ok());
}

TEST(CoreJsonTest, DomainLabelsRoundTrip) {
  const Domain d = *Domain::Create(2, {"yes", "no"});
  absl::StatusOr<Domain> back = DomainFromJson(DomainToJson(d));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->labels(), d.labels());
}

}  // namespace
}  // namespace median_mechanism
