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

#include "median_mechanism/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/string_view.h"
#include "json.hpp"
#include "median_mechanism/core.h"
#include "median_mechanism/core_json.h"
#include "median_mechanism/median_basic.h"
#include "median_mechanism/median_efficient.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/query_stream.h"
#include "median_mechanism/transcript.h"

#ifndef MM_VERSION_STRING
#define MM_VERSION_STRING "median-mechanism 0.1.0"
#endif

namespace median_mechanism {

using nlohmann::json;

namespace {

// Stream tags for DeriveSeed.
constexpr uint64_t kDatabaseStream = 1;
constexpr uint64_t kQueryStream = 2;
constexpr uint64_t kMechanismStream = 3;

absl::Status CheckKeys(const json& doc, absl::string_view where,
                       std::initializer_list<absl::string_view> allowed) {
  if (!doc.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", where, "' must be an object"));
  }
  for (const auto& item : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) ==
        allowed.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown key '", item.key(), "' in '", where, "'"));
    }
  }
  return absl::OkStatus();
}

template <typename T>
absl::Status ReadField(const json& doc, absl::string_view key, T* out) {
  const std::string k(key);
  if (!doc.contains(k)) return absl::OkStatus();
  try {
    *out = doc.at(k).get<T>();
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad value for '", key, "': ", e.what()));
  }
  return absl::OkStatus();
}

#define MM_RETURN_IF_ERROR(expr)              \
  do {                                        \
    absl::Status mm_status_ = (expr);         \
    if (!mm_status_.ok()) return mm_status_;  \
  } while (false)

}  // namespace

absl::string_view MechanismName(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kLaplace:
      return "laplace";
    case MechanismKind::kMedianBasic:
      return "median-basic";
    case MechanismKind::kMedianEfficient:
      return "median-efficient";
  }
  return "unknown";
}

absl::StatusOr<MechanismKind> ParseMechanismKind(absl::string_view name) {
  if (name == "laplace") return MechanismKind::kLaplace;
  if (name == "median-basic") return MechanismKind::kMedianBasic;
  if (name == "median-efficient") return MechanismKind::kMedianEfficient;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown mechanism '", name,
                   "' (expected laplace, median-basic or median-efficient)"));
}

absl::string_view DatabaseSourceName(DatabaseSourceKind kind) {
  switch (kind) {
    case DatabaseSourceKind::kCounts:
      return "counts";
    case DatabaseSourceKind::kUniform:
      return "uniform";
    case DatabaseSourceKind::kDatabaseSample:
      return "database_sample";
  }
  return "unknown";
}

int64_t ExperimentConfig::QueriesPerTrial() const {
  return num_queries < 0 ? k : std::min(num_queries, k);
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(const json& doc) {
  MM_RETURN_IF_ERROR(CheckKeys(doc, "config",
                               {"domain", "database", "mechanism", "params",
                                "queries", "estimator", "enumeration_cap",
                                "trials", "seed", "output_dir"}));
  ExperimentConfig c;

  if (!doc.contains("domain")) {
    return absl::InvalidArgumentError("config needs 'domain'");
  }
  const json& domain = doc["domain"];
  MM_RETURN_IF_ERROR(CheckKeys(domain, "domain", {"size", "labels"}));
  MM_RETURN_IF_ERROR(ReadField(domain, "size", &c.domain_size));
  MM_RETURN_IF_ERROR(ReadField(domain, "labels", &c.labels));

  if (!doc.contains("database")) {
    return absl::InvalidArgumentError("config needs 'database'");
  }
  const json& db = doc["database"];
  MM_RETURN_IF_ERROR(CheckKeys(db, "database", {"source", "counts", "n"}));
  std::string source;
  MM_RETURN_IF_ERROR(ReadField(db, "source", &source));
  if (source.empty()) source = db.contains("counts") ? "counts" : "";
  if (source == "counts") {
    c.database_source = DatabaseSourceKind::kCounts;
    if (db.contains("n")) {
      return absl::InvalidArgumentError(
          "database source 'counts' takes no 'n'; n is the sum of counts");
    }
    MM_RETURN_IF_ERROR(ReadField(db, "counts", &c.counts));
  } else if (source == "uniform" || source == "database_sample") {
    c.database_source = source == "uniform"
                            ? DatabaseSourceKind::kUniform
                            : DatabaseSourceKind::kDatabaseSample;
    if (db.contains("counts")) {
      return absl::InvalidArgumentError(absl::StrCat(
          "database source '", source, "' cannot also give 'counts'"));
    }
    MM_RETURN_IF_ERROR(ReadField(db, "n", &c.n));
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "database 'source' must be counts, uniform or database_sample, got '",
        source, "'"));
  }

  std::string mechanism = "median-basic";
  MM_RETURN_IF_ERROR(ReadField(doc, "mechanism", &mechanism));
  absl::StatusOr<MechanismKind> kind = ParseMechanismKind(mechanism);
  if (!kind.ok()) return kind.status();
  c.mechanism = *kind;

  if (doc.contains("params")) {
    const json& p = doc["params"];
    MM_RETURN_IF_ERROR(CheckKeys(
        p, "params", {"alpha", "eps", "k", "mode", "constants", "m_override"}));
    MM_RETURN_IF_ERROR(ReadField(p, "alpha", &c.alpha));
    MM_RETURN_IF_ERROR(ReadField(p, "eps", &c.eps));
    MM_RETURN_IF_ERROR(ReadField(p, "k", &c.k));
    MM_RETURN_IF_ERROR(ReadField(p, "m_override", &c.m_override));
    std::string mode = std::string(ParamModeName(c.mode));
    MM_RETURN_IF_ERROR(ReadField(p, "mode", &mode));
    absl::StatusOr<ParamMode> parsed = ParseParamMode(mode);
    if (!parsed.ok()) return parsed.status();
    c.mode = *parsed;
    if (p.contains("constants")) {
      const json& k = p["constants"];
      MM_RETURN_IF_ERROR(
          CheckKeys(k, "constants", {"c_m", "c_alpha_denom", "c_gamma"}));
      MM_RETURN_IF_ERROR(ReadField(k, "c_m", &c.constants.c_m));
      MM_RETURN_IF_ERROR(
          ReadField(k, "c_alpha_denom", &c.constants.c_alpha_denom));
      MM_RETURN_IF_ERROR(ReadField(k, "c_gamma", &c.constants.c_gamma));
    }
  }

  if (doc.contains("queries")) {
    const json& q = doc["queries"];
    MM_RETURN_IF_ERROR(CheckKeys(q, "queries", {"kind", "count"}));
    std::string name = std::string(QueryStreamName(c.queries));
    MM_RETURN_IF_ERROR(ReadField(q, "kind", &name));
    absl::StatusOr<QueryStreamKind> stream = ParseQueryStreamKind(name);
    if (!stream.ok()) return stream.status();
    c.queries = *stream;
    MM_RETURN_IF_ERROR(ReadField(q, "count", &c.num_queries));
  }

  if (doc.contains("estimator")) {
    const json& e = doc["estimator"];
    MM_RETURN_IF_ERROR(CheckKeys(e, "estimator",
                                 {"sample_count", "burn_in", "thinning",
                                  "chains", "covariance_rounding"}));
    MM_RETURN_IF_ERROR(ReadField(e, "sample_count", &c.estimator.sample_count));
    MM_RETURN_IF_ERROR(ReadField(e, "burn_in", &c.estimator.walk.burn_in));
    MM_RETURN_IF_ERROR(ReadField(e, "thinning", &c.estimator.walk.thinning));
    MM_RETURN_IF_ERROR(ReadField(e, "chains", &c.estimator.walk.chains));
    MM_RETURN_IF_ERROR(ReadField(e, "covariance_rounding",
                                 &c.estimator.walk.covariance_rounding));
  }
  MM_RETURN_IF_ERROR(ReadField(doc, "enumeration_cap", &c.enumeration_cap));
  MM_RETURN_IF_ERROR(ReadField(doc, "trials", &c.trials));
  MM_RETURN_IF_ERROR(ReadField(doc, "seed", &c.seed));
  MM_RETURN_IF_ERROR(ReadField(doc, "output_dir", &c.output_dir));
  MM_RETURN_IF_ERROR(ValidateExperimentConfig(c));
  return c;
}

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open config '", path, "'"));
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config '", path, "' is not valid JSON: ", e.what()));
  }
  return ParseExperimentConfig(doc);
}

json ExperimentConfigToJson(const ExperimentConfig& c) {
  json domain = {{"size", c.domain_size}};
  if (!c.labels.empty()) domain["labels"] = c.labels;
  json database = {{"source", std::string(DatabaseSourceName(
                                  c.database_source))}};
  if (c.database_source == DatabaseSourceKind::kCounts) {
    database["counts"] = c.counts;
  } else {
    database["n"] = c.n;
  }
  json params = {{"alpha", c.alpha},
                 {"eps", c.eps},
                 {"k", c.k},
                 {"mode", std::string(ParamModeName(c.mode))},
                 {"constants",
                  {{"c_m", c.constants.c_m},
                   {"c_alpha_denom", c.constants.c_alpha_denom},
                   {"c_gamma", c.constants.c_gamma}}}};
  if (c.m_override > 0) params["m_override"] = c.m_override;
  return {
      {"domain", domain},
      {"database", database},
      {"mechanism", std::string(MechanismName(c.mechanism))},
      {"params", params},
      {"queries",
       {{"kind", std::string(QueryStreamName(c.queries))},
        {"count", c.QueriesPerTrial()}}},
      {"estimator",
       {{"sample_count", c.estimator.sample_count},
        {"burn_in", c.estimator.walk.burn_in},
        {"thinning", c.estimator.walk.thinning},
        {"chains", c.estimator.walk.chains},
        {"covariance_rounding", c.estimator.walk.covariance_rounding}}},
      {"enumeration_cap", c.enumeration_cap},
      {"trials", c.trials},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
  };
}

absl::Status ValidateExperimentConfig(const ExperimentConfig& c) {
  if (c.domain_size < 1) {
    return absl::InvalidArgumentError("domain size must be at least 1");
  }
  absl::StatusOr<Domain> domain = Domain::Create(c.domain_size, c.labels);
  if (!domain.ok()) return domain.status();
  if (c.database_source == DatabaseSourceKind::kCounts) {
    if (c.counts.size() != c.domain_size) {
      return absl::InvalidArgumentError(absl::StrCat(
          "database counts have ", c.counts.size(),
          " entries, domain size is ", c.domain_size));
    }
    absl::StatusOr<Database> db = Database::FromCounts(c.counts);
    if (!db.ok()) return db.status();
  } else if (c.n < 1) {
    return absl::InvalidArgumentError("database 'n' must be at least 1");
  }
  if (!(c.alpha > 0.0)) {
    return absl::InvalidArgumentError("alpha must be positive");
  }
  if (!(c.eps > 0.0)) return absl::InvalidArgumentError("eps must be positive");
  if (c.k < 1) return absl::InvalidArgumentError("k must be at least 1");
  if (c.trials < 0) return absl::InvalidArgumentError("trials must be >= 0");
  if (c.mechanism != MechanismKind::kLaplace) {
    if (c.domain_size < 2) {
      return absl::InvalidArgumentError(
          "median mechanisms need a domain of at least 2 elements");
    }
    if (c.k < 2) {
      return absl::InvalidArgumentError("median mechanisms need k >= 2");
    }
  }
  if (c.mechanism == MechanismKind::kMedianEfficient &&
      c.estimator.sample_count < 0) {
    return absl::InvalidArgumentError("sample_count must be nonnegative");
  }
  return absl::OkStatus();
}

double RunMetrics::accurate_fraction() const {
  if (answered == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(accurate) / static_cast<double>(answered);
}

uint64_t TrialSeed(uint64_t seed, int64_t trial) {
  return DeriveSeed(seed, 0, static_cast<uint64_t>(trial));
}

absl::StatusOr<Database> MakeDatabase(const ExperimentConfig& c,
                                      uint64_t trial_seed) {
  Rng rng(DeriveSeed(trial_seed, kDatabaseStream));
  switch (c.database_source) {
    case DatabaseSourceKind::kCounts:
      return Database::FromCounts(c.counts);
    case DatabaseSourceKind::kUniform: {
      std::vector<double> weights(c.domain_size, 1.0);
      return DrawDatabase(weights, c.n, rng);
    }
    case DatabaseSourceKind::kDatabaseSample:
      return DatabaseSample(c.domain_size, c.n, rng);
  }
  return absl::InternalError("unhandled database source");
}

absl::StatusOr<MechanismParams> MakeParams(const ExperimentConfig& c,
                                           int64_t n) {
  return DeriveParams(c.alpha, c.eps, c.k, n, c.domain_size, c.constants,
                      c.mode, c.m_override);
}

namespace {

// The baseline: each query independently perturbed at scale k / (n alpha).
Transcript RunLaplaceTrial(const ExperimentConfig& c, const Database& db,
                           QuerySource& source, uint64_t seed) {
  Transcript t;
  t.mechanism = "laplace";
  Rng rng(seed);
  const double sigma = LaplaceBudgetScale(c.k, db.size(), c.alpha);
  std::vector<ReleasedAnswer> history;
  const int64_t limit = c.QueriesPerTrial();
  while (static_cast<int64_t>(history.size()) < limit) {
    std::optional<Predicate> f = source.Next(history);
    if (!f.has_value()) break;
    TranscriptEntry e;
    e.index = static_cast<int64_t>(history.size()) + 1;
    e.query = *f;
    e.truth = *EvaluateQuery(*f, db);
    e.d = Classification::kHard;
    e.a = e.truth + sigma * SampleUnitLaplace(rng);
    e.hard_count = e.index;
    t.entries.push_back(e);
    history.push_back({e.d, e.a});
  }
  return t;
}

// Stops a session's source after the configured number of queries.
class LimitedSource : public QuerySource {
 public:
  LimitedSource(QuerySource& inner, int64_t limit)
      : inner_(inner), limit_(limit) {}

  std::optional<Predicate> Next(
      std::span<const ReleasedAnswer> history) override {
    if (static_cast<int64_t>(history.size()) >= limit_) return std::nullopt;
    return inner_.Next(history);
  }

 private:
  QuerySource& inner_;
  int64_t limit_;
};

}  // namespace

RunMetrics ComputeMetrics(const ExperimentConfig& c,
                          const Transcript& transcript, int64_t trial,
                          uint64_t trial_seed) {
  RunMetrics m;
  m.mechanism = transcript.mechanism;
  m.trial = trial;
  m.seed = trial_seed;
  m.k = c.k;
  m.requested = c.QueriesPerTrial();
  m.answered = static_cast<int64_t>(transcript.entries.size());
  m.failed = transcript.failed();
  m.failure_cause = transcript.failure;
  double total = 0.0;
  for (const TranscriptEntry& e : transcript.entries) {
    if (e.d == Classification::kEasy) {
      ++m.easy;
    } else {
      ++m.hard;
    }
    const double err = std::abs(e.a - e.truth);
    m.abs_errors.push_back(err);
    total += err;
    m.max_abs_error = std::max(m.max_abs_error, err);
    if (err <= c.eps) ++m.accurate;
  }
  if (m.answered > 0) {
    m.mean_abs_error = total / static_cast<double>(m.answered);
  }
  m.useful = !m.failed && m.answered == m.requested && m.accurate == m.answered;
  return m;
}

absl::StatusOr<TrialResult> RunTrial(const ExperimentConfig& c,
                                     int64_t trial) {
  const uint64_t trial_seed = TrialSeed(c.seed, trial);
  absl::StatusOr<Database> db = MakeDatabase(c, trial_seed);
  if (!db.ok()) return db.status();
  std::unique_ptr<QuerySource> stream = MakeQueryStream(
      c.queries, c.domain_size, DeriveSeed(trial_seed, kQueryStream));
  LimitedSource source(*stream, c.QueriesPerTrial());
  const uint64_t mechanism_seed = DeriveSeed(trial_seed, kMechanismStream);

  absl::StatusOr<Transcript> transcript;
  switch (c.mechanism) {
    case MechanismKind::kLaplace:
      transcript = RunLaplaceTrial(c, *db, source, mechanism_seed);
      break;
    case MechanismKind::kMedianBasic: {
      absl::StatusOr<MechanismParams> params = MakeParams(c, db->size());
      if (!params.ok()) return params.status();
      BasicSessionOptions options;
      options.enumeration_cap = c.enumeration_cap;
      transcript = RunBasicSession(*db, source, *params, mechanism_seed,
                                   options);
      break;
    }
    case MechanismKind::kMedianEfficient: {
      absl::StatusOr<MechanismParams> params = MakeParams(c, db->size());
      if (!params.ok()) return params.status();
      EfficientSessionOptions options;
      options.estimator = c.estimator;
      transcript = RunEfficientSession(*db, source, *params, mechanism_seed,
                                       options);
      break;
    }
  }
  if (!transcript.ok()) return transcript.status();
  TrialResult result{*db, *std::move(transcript), RunMetrics{}};
  result.metrics = ComputeMetrics(c, result.transcript, trial, trial_seed);
  return result;
}

std::string MetricsCsvHeader() {
  return "mechanism,trial,seed,k,requested,answered,easy,hard,failed,"
         "failure_cause,accurate,accurate_fraction,mean_abs_error,"
         "max_abs_error,useful";
}

std::string MetricsCsvRow(const RunMetrics& m) {
  const double fraction = m.accurate_fraction();
  return absl::StrFormat(
      "%s,%d,%d,%d,%d,%d,%d,%d,%d,%s,%d,%s,%.17g,%.17g,%d", m.mechanism,
      m.trial, m.seed, m.k, m.requested, m.answered, m.easy, m.hard,
      m.failed ? 1 : 0, FailureCauseName(m.failure_cause), m.accurate,
      std::isnan(fraction) ? std::string("NA")
                           : absl::StrFormat("%.17g", fraction),
      m.mean_abs_error, m.max_abs_error, m.useful ? 1 : 0);
}

std::string VersionString() { return MM_VERSION_STRING; }

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& c) {
  MM_RETURN_IF_ERROR(ValidateExperimentConfig(c));
  const auto start = std::chrono::steady_clock::now();
  const bool write = !c.output_dir.empty();
  std::filesystem::path dir(c.output_dir);
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      return absl::UnavailableError(absl::StrCat(
          "cannot create output directory '", c.output_dir,
          "': ", ec.message()));
    }
  }
  ExperimentResult result;
  std::ostringstream csv;
  csv << MetricsCsvHeader() << '\n';
  json params_echo = nullptr;
  for (int64_t trial = 0; trial < c.trials; ++trial) {
    absl::StatusOr<TrialResult> r = RunTrial(c, trial);
    if (!r.ok()) return r.status();
    if (write) {
      const std::string name = absl::StrFormat("transcript-%03d.jsonl", trial);
      std::ofstream out(dir / name, std::ios::binary);
      WriteTranscriptJsonl(r->transcript, /*release_view=*/false, out);
      if (!out) {
        return absl::UnavailableError(
            absl::StrCat("failed writing ", (dir / name).string()));
      }
    }
    if (params_echo.is_null() && c.mechanism != MechanismKind::kLaplace) {
      absl::StatusOr<MechanismParams> p = MakeParams(c, r->database.size());
      if (p.ok()) params_echo = ParamsToJson(*p);
    }
    csv << MetricsCsvRow(r->metrics) << '\n';
    result.metrics.push_back(std::move(r->metrics));
  }
  result.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  if (write) {
    std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
    metrics << csv.str();
    json meta = {
        {"version", VersionString()},
        {"transcript_schema", "median-mechanism-transcript/1"},
        {"metrics_schema", "median-mechanism-metrics/1"},
        {"config", ExperimentConfigToJson(c)},
        {"params", params_echo},
        {"non_private_fields",
         {"r", "r_hat", "t", "j", "hard_count", "set_size_before",
          "set_size_after", "r_stderr", "forced_hard"}},
        {"wall_time_seconds", result.wall_seconds},
    };
    std::ofstream out(dir / "metadata.json", std::ios::binary);
    out << meta.dump(2) << '\n';
    if (!metrics || !out) {
      return absl::UnavailableError("failed writing experiment outputs");
    }
  }
  return result;
}

absl::StatusOr<UsefulnessSweep> SweepUsefulness(const ExperimentConfig& base,
                                                std::span<const int64_t> k_grid,
                                                double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in [0, 1)");
  }
  std::vector<int64_t> grid(k_grid.begin(), k_grid.end());
  std::sort(grid.rbegin(), grid.rend());
  UsefulnessSweep sweep;
  sweep.mechanism = std::string(MechanismName(base.mechanism));
  const int64_t allowed =
      static_cast<int64_t>(std::floor(delta * static_cast<double>(base.trials)
                                      + 1e-9));
  for (int64_t k : grid) {
    ExperimentConfig c = base;
    c.k = k;
    c.num_queries = k;
    c.output_dir.clear();
    UsefulnessPoint point;
    point.k = k;
    int64_t failures = 0;
    for (int64_t trial = 0; trial < c.trials; ++trial) {
      absl::StatusOr<TrialResult> r = RunTrial(c, trial);
      if (!r.ok()) return r.status();
      ++point.trials;
      if (r->metrics.useful) {
        ++point.useful;
      } else if (++failures > allowed) {
        break;
      }
    }
    point.passes = failures <= allowed && point.trials == c.trials;
    sweep.points.push_back(point);
    if (point.passes) {
      sweep.largest_useful_k = k;
      break;
    }
  }
  return sweep;
}

}  // namespace median_mechanism
