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

// Experiment configuration, trial execution, metrics and output files.

#ifndef MEDIAN_MECHANISM_EXPERIMENT_H_
#define MEDIAN_MECHANISM_EXPERIMENT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "json.hpp"
#include "median_mechanism/core.h"
#include "median_mechanism/median_efficient.h"
#include "median_mechanism/query_stream.h"
#include "median_mechanism/transcript.h"

namespace median_mechanism {

enum class MechanismKind { kLaplace, kMedianBasic, kMedianEfficient };
enum class DatabaseSourceKind { kCounts, kUniform, kDatabaseSample };

absl::string_view MechanismName(MechanismKind kind);
absl::StatusOr<MechanismKind> ParseMechanismKind(absl::string_view name);
absl::string_view DatabaseSourceName(DatabaseSourceKind kind);

struct ExperimentConfig {
  size_t domain_size = 0;
  std::vector<std::string> labels;

  DatabaseSourceKind database_source = DatabaseSourceKind::kCounts;
  std::vector<int64_t> counts;  // kCounts
  int64_t n = 0;                // kUniform and kDatabaseSample

  MechanismKind mechanism = MechanismKind::kMedianBasic;
  double alpha = 1.0;
  double eps = 0.5;
  int64_t k = 2;
  ParamConstants constants;
  ParamMode mode = ParamMode::kScaled;
  int64_t m_override = 0;

  QueryStreamKind queries = QueryStreamKind::kRandom;
  // Queries asked per trial; at most k. Negative means k.
  int64_t num_queries = -1;

  EstimatorConfig estimator;
  int64_t enumeration_cap = 10'000'000;

  int64_t trials = 1;
  uint64_t seed = 0;
  std::string output_dir;

  int64_t QueriesPerTrial() const;
};

// Parses the JSON document described in the README. Unknown keys are errors.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(
    const nlohmann::json& doc);
absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path);
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config);
// Checks cross-field consistency, e.g. exactly one database source.
absl::Status ValidateExperimentConfig(const ExperimentConfig& config);

struct RunMetrics {
  std::string mechanism;
  int64_t trial = 0;
  uint64_t seed = 0;
  int64_t k = 0;
  int64_t requested = 0;
  int64_t answered = 0;
  int64_t easy = 0;
  int64_t hard = 0;
  bool failed = false;
  FailureCause failure_cause = FailureCause::kNone;
  int64_t accurate = 0;
  double mean_abs_error = 0;
  double max_abs_error = 0;
  // Every requested query answered, all within eps, no failure.
  bool useful = false;
  std::vector<double> abs_errors;

  // accurate / answered, or NaN with no answers.
  double accurate_fraction() const;
};

struct TrialResult {
  Database database;
  Transcript transcript;
  RunMetrics metrics;
};

// Seed of trial `trial`, and the component streams derived from it.
uint64_t TrialSeed(uint64_t seed, int64_t trial);

absl::StatusOr<Database> MakeDatabase(const ExperimentConfig& config,
                                      uint64_t trial_seed);
absl::StatusOr<MechanismParams> MakeParams(const ExperimentConfig& config,
                                           int64_t n);

// Deterministic given the config and trial index.
absl::StatusOr<TrialResult> RunTrial(const ExperimentConfig& config,
                                     int64_t trial);

RunMetrics ComputeMetrics(const ExperimentConfig& config,
                          const Transcript& transcript, int64_t trial,
                          uint64_t trial_seed);

// The fixed metrics.csv header and one formatted row.
std::string MetricsCsvHeader();
std::string MetricsCsvRow(const RunMetrics& metrics);

struct ExperimentResult {
  std::vector<RunMetrics> metrics;
  double wall_seconds = 0;
};

// Runs every trial. With a nonempty output_dir, writes transcript-NNN.jsonl
// per trial, metrics.csv and metadata.json there.
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config);

std::string VersionString();

struct UsefulnessPoint {
  int64_t k = 0;
  int64_t trials = 0;
  int64_t useful = 0;
  bool passes = false;
};

struct UsefulnessSweep {
  std::string mechanism;
  // Largest grid k at which at least (1 - delta) of trials were useful, or 0.
  int64_t largest_useful_k = 0;
  std::vector<UsefulnessPoint> points;
};

// Walks `k_grid` from the largest value down and stops at the first k that
// passes. A k is abandoned early once the failures already rule it out.
absl::StatusOr<UsefulnessSweep> SweepUsefulness(const ExperimentConfig& base,
                                                std::span<const int64_t> k_grid,
                                                double delta);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_EXPERIMENT_H_
