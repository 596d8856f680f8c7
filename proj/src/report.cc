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

#include "median_mechanism/report.h"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "median_mechanism/experiment.h"

namespace median_mechanism {
namespace {

absl::Status RowError(absl::string_view origin, size_t line,
                      absl::string_view what) {
  return absl::InvalidArgumentError(
      absl::StrCat(origin, ":", line, ": ", what));
}

}  // namespace

absl::StatusOr<std::vector<MetricsRow>> ParseMetricsCsv(
    absl::string_view text, absl::string_view origin) {
  std::vector<absl::string_view> lines = absl::StrSplit(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() ||
      absl::StripSuffix(lines[0], "\r") != MetricsCsvHeader()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "schema mismatch in ", origin, ": expected header '",
        MetricsCsvHeader(), "'"));
  }
  std::vector<MetricsRow> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f =
        absl::StrSplit(absl::StripSuffix(lines[i], "\r"), ',');
    if (f.size() != 15) {
      return RowError(origin, i + 1, "schema mismatch: expected 15 columns");
    }
    MetricsRow r;
    r.mechanism = f[0];
    int failed = 0;
    int useful = 0;
    bool ok = absl::SimpleAtoi(f[1], &r.trial) &&
              absl::SimpleAtoi(f[2], &r.seed) && absl::SimpleAtoi(f[3], &r.k) &&
              absl::SimpleAtoi(f[4], &r.requested) &&
              absl::SimpleAtoi(f[5], &r.answered) &&
              absl::SimpleAtoi(f[6], &r.easy) &&
              absl::SimpleAtoi(f[7], &r.hard) &&
              absl::SimpleAtoi(f[8], &failed) &&
              absl::SimpleAtoi(f[10], &r.accurate) &&
              absl::SimpleAtod(f[12], &r.mean_abs_error) &&
              absl::SimpleAtod(f[13], &r.max_abs_error) &&
              absl::SimpleAtoi(f[14], &useful);
    if (f[11] == "NA") {
      r.accurate_fraction = std::numeric_limits<double>::quiet_NaN();
    } else {
      ok = ok && absl::SimpleAtod(f[11], &r.accurate_fraction);
    }
    if (!ok) return RowError(origin, i + 1, "unparsable field");
    r.failed = failed != 0;
    r.failure_cause = f[9];
    r.useful = useful != 0;
    rows.push_back(std::move(r));
  }
  return rows;
}

absl::StatusOr<std::vector<MetricsRow>> ReadMetricsCsv(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseMetricsCsv(buffer.str(), path);
}

double NearestRankQuantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(q * static_cast<double>(values.size()));
  const size_t index = static_cast<size_t>(std::max(rank, 1.0)) - 1;
  return values[std::min(index, values.size() - 1)];
}

std::vector<MechanismSummary> Summarize(std::span<const MetricsRow> rows) {
  std::map<std::string, std::vector<const MetricsRow*>> groups;
  for (const MetricsRow& r : rows) groups[r.mechanism].push_back(&r);
  std::vector<MechanismSummary> out;
  for (const auto& [name, group] : groups) {
    MechanismSummary s;
    s.mechanism = name;
    s.trials = static_cast<int64_t>(group.size());
    std::vector<double> max_errors;
    double errors = 0.0;
    double hard = 0.0;
    int64_t failed = 0;
    int64_t useful = 0;
    for (const MetricsRow* r : group) {
      errors += r->mean_abs_error;
      hard += static_cast<double>(r->hard);
      max_errors.push_back(r->max_abs_error);
      if (r->failed) ++failed;
      if (r->useful) ++useful;
    }
    const double n = static_cast<double>(group.size());
    s.mean_error = errors / n;
    s.mean_hard = hard / n;
    s.failure_rate = static_cast<double>(failed) / n;
    s.useful_rate = static_cast<double>(useful) / n;
    s.median_max_error = NearestRankQuantile(max_errors, 0.5);
    s.p90_max_error = NearestRankQuantile(max_errors, 0.9);
    out.push_back(s);
  }
  return out;
}

std::string SummaryCsv(std::span<const MechanismSummary> summaries) {
  std::string out =
      "mechanism,trials,mean_error,median_max_error,p90_max_error,mean_hard,"
      "failure_rate,useful_rate\n";
  for (const MechanismSummary& s : summaries) {
    absl::StrAppendFormat(&out, "%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          s.mechanism, s.trials, s.mean_error,
                          s.median_max_error, s.p90_max_error, s.mean_hard,
                          s.failure_rate, s.useful_rate);
  }
  return out;
}

std::string SummaryTable(std::span<const MechanismSummary> summaries) {
  std::string out = absl::StrFormat(
      "%-18s %7s %11s %11s %11s %9s %8s %8s\n", "mechanism", "trials",
      "mean_err", "med_max", "p90_max", "mean_hard", "fail", "useful");
  for (const MechanismSummary& s : summaries) {
    absl::StrAppendFormat(&out,
                          "%-18s %7d %11.5f %11.5f %11.5f %9.2f %8.3f %8.3f\n",
                          s.mechanism, s.trials, s.mean_error,
                          s.median_max_error, s.p90_max_error, s.mean_hard,
                          s.failure_rate, s.useful_rate);
  }
  return out;
}

absl::StatusOr<std::vector<std::string>> ExpandGlob(
    const std::string& pattern) {
  glob_t matches;
  const int rc = glob(pattern.c_str(), 0, nullptr, &matches);
  if (rc == GLOB_NOMATCH) {
    globfree(&matches);
    return absl::NotFoundError(absl::StrCat("no files match '", pattern, "'"));
  }
  if (rc != 0) {
    globfree(&matches);
    return absl::InternalError(absl::StrCat("glob failed for '", pattern, "'"));
  }
  std::vector<std::string> out(matches.gl_pathv,
                               matches.gl_pathv + matches.gl_pathc);
  globfree(&matches);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace median_mechanism
