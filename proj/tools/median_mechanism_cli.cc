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

// mmcli: run experiments, aggregate their metrics, and drive the oracle
// verification suites.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "median_mechanism/experiment.h"
#include "median_mechanism/report.h"
#include "verify_suites.h"

namespace mm = median_mechanism;

namespace {

int Fail(const absl::Status& status) {
  std::cerr << "error: " << status << "\n";
  return 1;
}

struct RunFlags {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<std::string> mechanism;
  std::optional<std::string> out;
  std::optional<int64_t> trials;
};

absl::StatusOr<mm::ExperimentConfig> LoadWithOverrides(const RunFlags& flags) {
  absl::StatusOr<mm::ExperimentConfig> config =
      mm::LoadExperimentConfig(flags.config);
  if (!config.ok()) return config.status();
  if (flags.seed) config->seed = *flags.seed;
  if (flags.mechanism) {
    absl::StatusOr<mm::MechanismKind> kind =
        mm::ParseMechanismKind(*flags.mechanism);
    if (!kind.ok()) return kind.status();
    config->mechanism = *kind;
  }
  if (flags.out) config->output_dir = *flags.out;
  if (flags.trials) config->trials = *flags.trials;
  if (absl::Status s = mm::ValidateExperimentConfig(*config); !s.ok()) return s;
  return config;
}

int RunCommand(const RunFlags& flags) {
  absl::StatusOr<mm::ExperimentConfig> config = LoadWithOverrides(flags);
  if (!config.ok()) return Fail(config.status());
  absl::StatusOr<mm::ExperimentResult> result = mm::RunExperiment(*config);
  if (!result.ok()) return Fail(result.status());
  std::vector<mm::MetricsRow> rows;
  for (const mm::RunMetrics& m : result->metrics) {
    absl::StatusOr<std::vector<mm::MetricsRow>> parsed = mm::ParseMetricsCsv(
        mm::MetricsCsvHeader() + "\n" + mm::MetricsCsvRow(m), "run");
    if (!parsed.ok()) return Fail(parsed.status());
    rows.insert(rows.end(), parsed->begin(), parsed->end());
  }
  std::cout << mm::SummaryTable(mm::Summarize(rows));
  if (!config->output_dir.empty()) {
    std::cout << "wrote " << config->trials << " transcript(s), metrics.csv "
              << "and metadata.json to " << config->output_dir << "\n";
  }
  return 0;
}

int CompareCommand(const std::vector<std::string>& patterns,
                   const std::string& csv_out) {
  std::vector<mm::MetricsRow> rows;
  for (const std::string& pattern : patterns) {
    absl::StatusOr<std::vector<std::string>> paths = mm::ExpandGlob(pattern);
    if (!paths.ok()) return Fail(paths.status());
    for (const std::string& path : *paths) {
      absl::StatusOr<std::vector<mm::MetricsRow>> parsed =
          mm::ReadMetricsCsv(path);
      if (!parsed.ok()) return Fail(parsed.status());
      rows.insert(rows.end(), parsed->begin(), parsed->end());
    }
  }
  const std::vector<mm::MechanismSummary> summary = mm::Summarize(rows);
  std::cout << mm::SummaryTable(summary);
  if (!csv_out.empty()) {
    std::ofstream out(csv_out, std::ios::binary);
    out << mm::SummaryCsv(summary);
    if (!out) return Fail(absl::UnavailableError("cannot write " + csv_out));
  } else {
    std::cout << "\n" << mm::SummaryCsv(summary);
  }
  return 0;
}

int VerifyCommand(const std::string& suite, uint64_t seed) {
  absl::StatusOr<std::vector<mm::SuiteResult>> results =
      mm::RunVerifySuite(suite, seed);
  if (!results.ok()) return Fail(results.status());
  bool all_passed = true;
  nlohmann::json report = nlohmann::json::array();
  for (const mm::SuiteResult& r : *results) {
    report.push_back(
        {{"suite", r.name}, {"passed", r.passed}, {"details", r.details}});
    all_passed = all_passed && r.passed;
  }
  std::cout << report.dump(2) << "\n";
  return all_passed ? 0 : 2;
}

int SweepCommand(const RunFlags& flags, const std::string& grid_text,
                 double delta) {
  absl::StatusOr<mm::ExperimentConfig> config = LoadWithOverrides(flags);
  if (!config.ok()) return Fail(config.status());
  std::vector<int64_t> grid;
  for (absl::string_view part : absl::StrSplit(grid_text, ',')) {
    int64_t k = 0;
    if (!absl::SimpleAtoi(part, &k) || k < 1) {
      return Fail(absl::InvalidArgumentError("bad --k-grid entry"));
    }
    grid.push_back(k);
  }
  absl::StatusOr<mm::UsefulnessSweep> sweep =
      mm::SweepUsefulness(*config, grid, delta);
  if (!sweep.ok()) return Fail(sweep.status());
  nlohmann::json points = nlohmann::json::array();
  for (const mm::UsefulnessPoint& p : sweep->points) {
    points.push_back({{"k", p.k},
                      {"trials", p.trials},
                      {"useful", p.useful},
                      {"passes", p.passes}});
  }
  nlohmann::json out = {{"mechanism", sweep->mechanism},
                        {"delta", delta},
                        {"largest_useful_k", sweep->largest_useful_k},
                        {"points", points}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Median mechanism simulator"};
  app.set_version_flag("--version", mm::VersionString());
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Run an experiment from a config");
  run->add_option("--config", run_flags.config, "Experiment JSON")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--seed", run_flags.seed, "Override the seed");
  run->add_option("--mechanism", run_flags.mechanism,
                  "laplace | median-basic | median-efficient");
  run->add_option("--out", run_flags.out, "Output directory");
  run->add_option("--trials", run_flags.trials, "Override the trial count");

  std::vector<std::string> inputs;
  std::string compare_csv;
  CLI::App* compare =
      app.add_subcommand("compare", "Aggregate metrics.csv files");
  compare->add_option("--inputs", inputs, "Glob(s) of metrics.csv files")
      ->required();
  compare->add_option("--csv", compare_csv, "Write the summary CSV here");

  std::string suite;
  uint64_t verify_seed = 1;
  CLI::App* verify = app.add_subcommand("verify", "Run an oracle suite");
  verify->add_option("--suite", suite, "sensitivity | laplace | sampler | all")
      ->required();
  verify->add_option("--seed", verify_seed, "Seed for randomized checks");

  RunFlags sweep_flags;
  std::string grid = "2,3,4,5,6,7,8,10,12,16,20,24,32";
  double delta = 0.05;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Largest k at which a mechanism stays (eps, delta)-useful");
  sweep->add_option("--config", sweep_flags.config, "Experiment JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--seed", sweep_flags.seed, "Override the seed");
  sweep->add_option("--mechanism", sweep_flags.mechanism, "Mechanism");
  sweep->add_option("--trials", sweep_flags.trials, "Trials per k");
  sweep->add_option("--k-grid", grid, "Comma-separated k values");
  sweep->add_option("--delta", delta, "Allowed failure probability");

  CLI11_PARSE(app, argc, argv);

  if (*run) return RunCommand(run_flags);
  if (*compare) return CompareCommand(inputs, compare_csv);
  if (*verify) return VerifyCommand(suite, verify_seed);
  if (*sweep) return SweepCommand(sweep_flags, grid, delta);
  return 1;
}
