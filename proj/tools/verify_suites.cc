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

#include "verify_suites.h"

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "median_mechanism/core.h"
#include "median_mechanism/hit_and_run.h"
#include "median_mechanism/median_basic.h"
#include "median_mechanism/noise.h"
#include "median_mechanism/oracle.h"
#include "median_mechanism/polytope.h"

namespace median_mechanism {
namespace {

// r-sensitivity over the whole exhaustive regime, for both the reference
// formula and the mechanism's implementation.
absl::StatusOr<SuiteResult> SensitivitySuite(uint64_t seed) {
  SuiteResult result{"sensitivity", true, nlohmann::json::array()};
  oracle::RFunction mechanism_r =
      [](const Database& db, const Predicate& f,
         const std::vector<std::vector<int64_t>>& members, int64_t m,
         double eps) {
        auto set = ConsistentSetBasic::FromMembers(db.domain_size(), m,
                                                   members);
        return *ComputeR(db, f, *set, eps);
      };
  for (double eps : {0.25, 0.5, 1.0}) {
    for (size_t d = 1; d <= 5; ++d) {
      for (int64_t n = 1; n <= 4; ++n) {
        for (int64_t m = 1; m <= 3; ++m) {
          for (bool use_mechanism : {false, true}) {
            oracle::SensitivityOptions options;
            options.seed = DeriveSeed(seed, d * 100 + n * 10 + m);
            if (use_mechanism) options.r_function = mechanism_r;
            auto report = oracle::VerifyRSensitivity(d, n, m, eps, options);
            if (!report.ok()) return report.status();
            if (!report->passed) {
              result.passed = false;
              nlohmann::json j = oracle::ToJson(*report);
              j["implementation"] = use_mechanism ? "mechanism" : "reference";
              result.details.push_back(j);
            }
          }
        }
      }
    }
  }
  if (result.passed) result.details = {{"violations", 0}};
  return result;
}

absl::StatusOr<SuiteResult> LaplaceSuite(uint64_t seed) {
  SuiteResult result{"laplace", true, {}};
  absl::StatusOr<LaplaceScale> unit = LaplaceScale::Create(1.0);
  Rng rng(seed);
  std::vector<double> samples(100000);
  for (double& x : samples) x = SampleLaplace(*unit, rng);
  const double ks = oracle::KolmogorovSmirnov(
      samples, [&](double x) { return LaplaceCdf(*unit, x); });
  result.details["ks_statistic"] = ks;
  result.passed = ks <= 0.02;

  // One query, n = 100, alpha = 0.5: neighbors shift the answer by 1/n.
  const double alpha = 0.5;
  const double sigma = LaplaceBudgetScale(1, 100, alpha);
  oracle::PrivacyLossOptions options;
  options.seed = seed;
  auto loss = oracle::PrivacyLossEstimate(
      [&](Rng& r) { return 0.50 + sigma * SampleUnitLaplace(r); },
      [&](Rng& r) { return 0.51 + sigma * SampleUnitLaplace(r); }, options);
  if (!loss.ok()) return loss.status();
  result.details["privacy_loss"] = oracle::ToJson(*loss);
  result.passed =
      result.passed && loss->estimate >= 0.4 && loss->estimate <= 0.6;
  return result;
}

absl::StatusOr<SuiteResult> SamplerSuite(uint64_t seed) {
  SuiteResult result{"sampler", true, {}};
  // Base simplex with m = 1 over three elements: E[F_i] = 1/4.
  absl::StatusOr<ConsistentPolytope> p = ConsistentPolytope::Create(3, 1.0);
  if (!p.ok()) return p.status();
  Rng rng(seed);
  auto samples = SampleUniform(*p, 10000, WalkConfig{}, rng);
  if (!samples.ok()) return samples.status();
  std::vector<double> mean(3, 0.0);
  int64_t outside = 0;
  for (const FractionalHistogram& h : *samples) {
    if (!p->ContainsPoint(h.weights)) ++outside;
    for (int j = 0; j < 3; ++j) mean[j] += h.weights[j] / 10000.0;
  }
  double worst = 0.0;
  for (double v : mean) worst = std::max(worst, std::abs(v - 0.25) / 0.25);
  result.details = {{"means", mean},
                    {"worst_relative_error", worst},
                    {"outside", outside}};
  result.passed = worst <= 0.02 && outside == 0;
  return result;
}

}  // namespace

std::vector<std::string> SuiteNames() {
  return {"sensitivity", "laplace", "sampler", "all"};
}

absl::StatusOr<std::vector<SuiteResult>> RunVerifySuite(
    const std::string& name, uint64_t seed) {
  std::vector<SuiteResult> out;
  const bool all = name == "all";
  bool matched = false;
  if (all || name == "sensitivity") {
    matched = true;
    auto r = SensitivitySuite(seed);
    if (!r.ok()) return r.status();
    out.push_back(*r);
  }
  if (all || name == "laplace") {
    matched = true;
    auto r = LaplaceSuite(seed);
    if (!r.ok()) return r.status();
    out.push_back(*r);
  }
  if (all || name == "sampler") {
    matched = true;
    auto r = SamplerSuite(seed);
    if (!r.ok()) return r.status();
    out.push_back(*r);
  }
  if (!matched) {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown suite '", name,
        "' (expected sensitivity, laplace, sampler or all)"));
  }
  return out;
}

}  // namespace median_mechanism
