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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "median_mechanism/core.h"
#include "median_mechanism/experiment.h"
#include "median_mechanism/query_stream.h"
#include "median_mechanism/report.h"
#include "median_mechanism/transcript.h"

namespace median_mechanism {
namespace {

using nlohmann::json;

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string FreshDir(absl::string_view name) {
  const std::filesystem::path dir =
      std::filesystem::path(::testing::TempDir()) / std::string(name);
  std::filesystem::remove_all(dir);
  return dir.string();
}

json SmallConfig() {
  return json::parse(R"({
    "domain": {"size": 4},
    "database": {"source": "uniform", "n": 40},
    "mechanism": "median-basic",
    "params": {"alpha": 1.0, "eps": 0.3, "k": 15, "mode": "scaled",
               "constants": {"c_m": 1, "c_alpha_denom": 0.01, "c_gamma": 4},
               "m_override": 3},
    "queries": {"kind": "random"},
    "trials": 3,
    "seed": 11
  })");
}

ExperimentConfig Parsed(const json& doc) {
  absl::StatusOr<ExperimentConfig> c = ParseExperimentConfig(doc);
  EXPECT_TRUE(c.ok()) << c.status();
  return *c;
}

TEST(QueryStreamTest, SingletonSweep) {
  SingletonSweepStream s(3);
  std::vector<std::string> seen;
  for (int i = 0; i < 4; ++i) seen.push_back(s.Next({})->ToBitString());
  EXPECT_EQ(seen, (std::vector<std::string>{"100", "010", "001", "100"}));
}

TEST(QueryStreamTest, RandomIsSeedDeterministic) {
  RandomQueryStream a(10, 4);
  RandomQueryStream b(10, 4);
  RandomQueryStream c(10, 5);
  bool differs = false;
  for (int i = 0; i < 50; ++i) {
    const Predicate pa = *a.Next({});
    EXPECT_EQ(pa, *b.Next({}));
    differs = differs || !(pa == *c.Next({}));
  }
  EXPECT_TRUE(differs);
}

TEST(QueryStreamTest, ParseRejectsUnknownKind) {
  EXPECT_TRUE(ParseQueryStreamKind("adaptive-bisection").ok());
  EXPECT_FALSE(ParseQueryStreamKind("sideways").ok());
}

TEST(QueryStreamTest, BisectionHalvesAgainstExactAnswers) {
  // Prefix fractions: 0 before element 3, 1/2 through element 5, then 1.
  const Database db = *Database::FromCounts({0, 0, 5, 0, 0, 5, 0, 0});
  AdaptiveBisectionStream s(8);
  std::vector<ReleasedAnswer> history;
  std::vector<int64_t> widths;
  std::vector<size_t> prefixes;
  for (int step = 0; step < 3; ++step) {
    const Predicate f = *s.Next(history);
    widths.push_back(s.hi() - s.lo() + 1);
    prefixes.push_back(f.popcount());
    history.push_back({Classification::kHard, *EvaluateQuery(f, db)});
  }
  EXPECT_EQ(widths, (std::vector<int64_t>{8, 4, 2}));
  EXPECT_EQ(prefixes, (std::vector<size_t>{4, 2, 3}));
  EXPECT_EQ(s.quantile(), 0.5);
  // The third answer pins the median at 3 and moves on to the next quantile.
  s.Next(history);
  EXPECT_EQ(s.quantile(), 0.25);
}

TEST(ConfigTest, ParsesAndRoundTrips) {
  const ExperimentConfig c = Parsed(SmallConfig());
  EXPECT_EQ(c.domain_size, 4u);
  EXPECT_EQ(c.database_source, DatabaseSourceKind::kUniform);
  EXPECT_EQ(c.m_override, 3);
  EXPECT_EQ(c.QueriesPerTrial(), 15);
  const ExperimentConfig again = Parsed(ExperimentConfigToJson(c));
  EXPECT_EQ(ExperimentConfigToJson(again), ExperimentConfigToJson(c));
}

TEST(ConfigTest, ShippedConfigsLoad) {
  for (const char* name : {"basic_small.json", "efficient_headline.json"}) {
    const absl::StatusOr<ExperimentConfig> c =
        LoadExperimentConfig(std::string(MM_CONFIG_DIR) + "/" + name);
    EXPECT_TRUE(c.ok()) << name << ": " << c.status();
  }
  EXPECT_FALSE(LoadExperimentConfig("/nonexistent/config.json").ok());
}

TEST(ConfigTest, RejectsUnknownKeysAndBadValues) {
  json doc = SmallConfig();
  doc["colour"] = "blue";
  EXPECT_FALSE(ParseExperimentConfig(doc).ok());
  doc = SmallConfig();
  doc["params"]["epsilon"] = 0.1;
  EXPECT_FALSE(ParseExperimentConfig(doc).ok());
  doc = SmallConfig();
  doc["mechanism"] = "median-fancy";
  EXPECT_FALSE(ParseExperimentConfig(doc).ok());
  doc = SmallConfig();
  doc["database"] = {{"source", "counts"}, {"counts", {1, 2}}};
  EXPECT_FALSE(ParseExperimentConfig(doc).ok());
}

TEST(ConfigTest, PaperExactInfeasibilityIsSurfaced) {
  json doc = SmallConfig();
  doc["params"] = {{"alpha", 1.0}, {"eps", 0.3}, {"k", 15},
                   {"mode", "paper-exact"}};
  const ExperimentConfig c = Parsed(doc);
  const absl::StatusOr<ExperimentResult> r = RunExperiment(c);
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.status().message().find("infeasible"), std::string::npos);
}

TEST(RunExperimentTest, ZeroQueriesGiveEmptyTranscript) {
  json doc = SmallConfig();
  doc["queries"]["count"] = 0;
  doc["trials"] = 1;
  ExperimentConfig c = Parsed(doc);
  c.output_dir = FreshDir("zero");
  const ExperimentResult r = *RunExperiment(c);
  ASSERT_EQ(r.metrics.size(), 1u);
  const RunMetrics& m = r.metrics[0];
  EXPECT_EQ(m.answered, 0);
  EXPECT_EQ(m.easy, 0);
  EXPECT_EQ(m.hard, 0);
  EXPECT_EQ(m.accurate, 0);
  EXPECT_EQ(m.mean_abs_error, 0.0);
  EXPECT_TRUE(std::isnan(m.accurate_fraction()));
  EXPECT_EQ(ReadFile(std::filesystem::path(c.output_dir) /
                     "transcript-000.jsonl"),
            "");
  const std::vector<std::string> lines = absl::StrSplit(
      ReadFile(std::filesystem::path(c.output_dir) / "metrics.csv"), '\n');
  ASSERT_GE(lines.size(), 2u);
  EXPECT_NE(lines[1].find(",NA,"), std::string::npos);
}

TEST(RunExperimentTest, BisectionAdversaryAtTinyMTripsHardCap) {
  json doc = SmallConfig();
  doc["domain"]["size"] = 8;
  doc["params"]["m_override"] = 1;
  doc["params"]["k"] = 80;
  doc["queries"]["kind"] = "adaptive-bisection";
  doc["trials"] = 2;
  const ExperimentResult r = *RunExperiment(Parsed(doc));
  for (const RunMetrics& m : r.metrics) {
    EXPECT_TRUE(m.failed);
    EXPECT_EQ(m.failure_cause, FailureCause::kHardCap);
    EXPECT_EQ(m.hard, 42);
    EXPECT_FALSE(m.useful);
    EXPECT_NE(MetricsCsvRow(m).find(",hard-cap,"), std::string::npos);
  }
}

TEST(RunExperimentTest, ByteIdenticalOutputsForSameSeed) {
  for (const char* mechanism :
       {"median-basic", "median-efficient", "laplace"}) {
    json doc = SmallConfig();
    doc["mechanism"] = mechanism;
    doc["estimator"] = {{"sample_count", 200}};
    ExperimentConfig a = Parsed(doc);
    ExperimentConfig b = a;
    a.output_dir = FreshDir(std::string("same-a-") + mechanism);
    b.output_dir = FreshDir(std::string("same-b-") + mechanism);
    ASSERT_TRUE(RunExperiment(a).ok());
    ASSERT_TRUE(RunExperiment(b).ok());
    for (const char* file : {"metrics.csv", "transcript-000.jsonl",
                             "transcript-002.jsonl"}) {
      const std::string x =
          ReadFile(std::filesystem::path(a.output_dir) / file);
      EXPECT_FALSE(x.empty()) << mechanism << " " << file;
      EXPECT_EQ(x, ReadFile(std::filesystem::path(b.output_dir) / file))
          << mechanism << " " << file;
    }
    const json meta = json::parse(
        ReadFile(std::filesystem::path(a.output_dir) / "metadata.json"));
    EXPECT_EQ(meta["config"], ExperimentConfigToJson(a));
    EXPECT_TRUE(meta["version"].get<std::string>().starts_with(
        "median-mechanism"));
  }
}

TEST(RunExperimentTest, LaplaceAnswersAreAllHard) {
  json doc = SmallConfig();
  doc["mechanism"] = "laplace";
  const ExperimentResult r = *RunExperiment(Parsed(doc));
  for (const RunMetrics& m : r.metrics) {
    EXPECT_EQ(m.easy, 0);
    EXPECT_EQ(m.hard, 15);
    EXPECT_FALSE(m.failed);
  }
}

TEST(RunExperimentTest, MetricsRecomputableFromTranscriptAndDatabase) {
  for (const char* mechanism :
       {"median-basic", "median-efficient", "laplace"}) {
    json doc = SmallConfig();
    doc["mechanism"] = mechanism;
    doc["estimator"] = {{"sample_count", 200}};
    ExperimentConfig c = Parsed(doc);
    c.output_dir = FreshDir(std::string("integrity-") + mechanism);
    ASSERT_TRUE(RunExperiment(c).ok());
    const std::filesystem::path dir(c.output_dir);
    const std::vector<MetricsRow> rows =
        *ReadMetricsCsv((dir / "metrics.csv").string());
    ASSERT_EQ(rows.size(), 3u);
    for (int64_t trial = 0; trial < 3; ++trial) {
      const Database db = *MakeDatabase(c, TrialSeed(c.seed, trial));
      std::istringstream lines(ReadFile(
          dir / absl::StrFormat("transcript-%03d.jsonl", trial)));
      std::string line;
      int64_t answered = 0;
      int64_t accurate = 0;
      double total = 0;
      while (std::getline(lines, line)) {
        const json e = json::parse(line);
        if (e.contains("failure")) continue;
        const Predicate f =
            *Predicate::FromBitString(e["query"].get<std::string>());
        const double err =
            std::abs(e["a"].get<double>() - *EvaluateQuery(f, db));
        ++answered;
        total += err;
        if (err <= c.eps) ++accurate;
      }
      const MetricsRow& row = rows[trial];
      EXPECT_EQ(row.answered, answered);
      EXPECT_EQ(row.accurate, accurate);
      ASSERT_GT(answered, 0);
      EXPECT_NEAR(row.accurate_fraction,
                  static_cast<double>(accurate) / answered, 1e-9);
      EXPECT_NEAR(row.mean_abs_error, total / answered, 1e-9);
    }
  }
}

TEST(RunExperimentTest, TrialSeedsAreIndependentOfTrialCount) {
  json doc = SmallConfig();
  doc["trials"] = 1;
  const ExperimentResult one = *RunExperiment(Parsed(doc));
  doc["trials"] = 3;
  const ExperimentResult three = *RunExperiment(Parsed(doc));
  EXPECT_EQ(MetricsCsvRow(one.metrics[0]), MetricsCsvRow(three.metrics[0]));
}

constexpr char kHandRows[] =
    "mechanism,trial,seed,k,requested,answered,easy,hard,failed,"
    "failure_cause,accurate,accurate_fraction,mean_abs_error,max_abs_error,"
    "useful\n"
    "laplace,0,1,5,5,5,0,5,0,none,5,1,0.1,0.2,1\n"
    "laplace,1,2,5,5,5,0,5,0,none,4,0.8,0.3,0.4,0\n"
    "laplace,2,3,5,5,5,0,5,0,none,5,1,0.2,0.6,1\n"
    "median-basic,0,1,5,5,3,1,2,1,hard-cap,3,1,0.05,0.1,0\n";

TEST(ReportTest, HandComputedSummary) {
  const std::vector<MetricsRow> rows = *ParseMetricsCsv(kHandRows, "hand");
  ASSERT_EQ(rows.size(), 4u);
  const std::vector<MechanismSummary> s = Summarize(rows);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].mechanism, "laplace");
  EXPECT_EQ(s[0].trials, 3);
  EXPECT_NEAR(s[0].mean_error, 0.2, 1e-15);
  EXPECT_EQ(s[0].median_max_error, 0.4);
  EXPECT_EQ(s[0].p90_max_error, 0.6);
  EXPECT_EQ(s[0].mean_hard, 5.0);
  EXPECT_EQ(s[0].failure_rate, 0.0);
  EXPECT_NEAR(s[0].useful_rate, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(s[1].mechanism, "median-basic");
  EXPECT_EQ(s[1].failure_rate, 1.0);
  EXPECT_EQ(s[1].mean_hard, 2.0);
}

TEST(ReportTest, IdentityAndDuplication) {
  const std::vector<MetricsRow> rows = *ParseMetricsCsv(kHandRows, "hand");
  const std::vector<MetricsRow> one(rows.begin(), rows.begin() + 1);
  const std::vector<MechanismSummary> s = Summarize(one);
  EXPECT_EQ(s[0].mean_error, one[0].mean_abs_error);
  EXPECT_EQ(s[0].median_max_error, one[0].max_abs_error);
  std::vector<MetricsRow> twice = rows;
  twice.insert(twice.end(), rows.begin(), rows.end());
  const std::vector<MechanismSummary> a = Summarize(rows);
  const std::vector<MechanismSummary> b = Summarize(twice);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(b[i].trials, 2 * a[i].trials);
    EXPECT_NEAR(b[i].mean_error, a[i].mean_error, 1e-15);
    EXPECT_EQ(b[i].median_max_error, a[i].median_max_error);
    EXPECT_EQ(b[i].p90_max_error, a[i].p90_max_error);
    EXPECT_EQ(b[i].mean_hard, a[i].mean_hard);
    EXPECT_EQ(b[i].failure_rate, a[i].failure_rate);
    EXPECT_EQ(b[i].useful_rate, a[i].useful_rate);
  }
  EXPECT_FALSE(SummaryTable(Summarize(rows)).empty());
}

TEST(ReportTest, SchemaMismatchIsAnError) {
  EXPECT_FALSE(ParseMetricsCsv("mechanism,trial\nlaplace,0\n", "bad").ok());
  EXPECT_FALSE(
      ParseMetricsCsv(std::string(kHandRows) + "laplace,0,1\n", "short").ok());
}

TEST(ReportTest, NearestRank) {
  EXPECT_EQ(NearestRankQuantile({3, 1, 2}, 0.5), 2);
  EXPECT_EQ(NearestRankQuantile({3, 1, 2}, 0.0), 1);
  EXPECT_EQ(NearestRankQuantile({3, 1, 2}, 1.0), 3);
  EXPECT_TRUE(std::isnan(NearestRankQuantile({}, 0.5)));
}

TEST(SweepTest, LaplaceUsefulnessShrinksWithK) {
  json doc = SmallConfig();
  doc["mechanism"] = "laplace";
  doc["trials"] = 40;
  // At k = 2 the per-answer miss probability is exp(-6); at k = 8 a miss in
  // some answer happens in about half the trials.
  const std::vector<int64_t> grid = {2, 8, 64};
  const UsefulnessSweep s = *SweepUsefulness(Parsed(doc), grid, 0.05);
  EXPECT_EQ(s.largest_useful_k, 2);
  ASSERT_FALSE(s.points.empty());
  EXPECT_FALSE(s.points.front().passes);
}

}  // namespace
}  // namespace median_mechanism
