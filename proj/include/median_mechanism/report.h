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

// Aggregation of metrics.csv files across runs and mechanisms.

#ifndef MEDIAN_MECHANISM_REPORT_H_
#define MEDIAN_MECHANISM_REPORT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace median_mechanism {

struct MetricsRow {
  std::string mechanism;
  int64_t trial = 0;
  uint64_t seed = 0;
  int64_t k = 0;
  int64_t requested = 0;
  int64_t answered = 0;
  int64_t easy = 0;
  int64_t hard = 0;
  bool failed = false;
  std::string failure_cause;
  int64_t accurate = 0;
  double accurate_fraction = 0;  // NaN when nothing was answered
  double mean_abs_error = 0;
  double max_abs_error = 0;
  bool useful = false;
};

// Parses the contents of one metrics.csv. `origin` names it in errors. A
// header other than MetricsCsvHeader() is a schema mismatch.
absl::StatusOr<std::vector<MetricsRow>> ParseMetricsCsv(
    absl::string_view text, absl::string_view origin);
absl::StatusOr<std::vector<MetricsRow>> ReadMetricsCsv(const std::string& path);

struct MechanismSummary {
  std::string mechanism;
  int64_t trials = 0;
  double mean_error = 0;        // mean over trials of mean_abs_error
  double median_max_error = 0;  // nearest-rank quantiles of max_abs_error
  double p90_max_error = 0;
  double mean_hard = 0;
  double failure_rate = 0;
  double useful_rate = 0;
};

// One summary per mechanism, ordered by name.
std::vector<MechanismSummary> Summarize(std::span<const MetricsRow> rows);

// Nearest-rank quantile: the ceil(q * n)-th smallest value, q in (0, 1].
double NearestRankQuantile(std::vector<double> values, double q);

std::string SummaryCsv(std::span<const MechanismSummary> summaries);
std::string SummaryTable(std::span<const MechanismSummary> summaries);

// Paths matching a shell glob, sorted. No match is NotFound.
absl::StatusOr<std::vector<std::string>> ExpandGlob(const std::string& pattern);

}  // namespace median_mechanism

#endif  // MEDIAN_MECHANISM_REPORT_H_
