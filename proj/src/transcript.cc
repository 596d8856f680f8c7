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

#include "median_mechanism/transcript.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/string_view.h"
#include "json.hpp"
#include "median_mechanism/noise.h"

namespace median_mechanism {

absl::string_view ClassificationName(Classification d) {
  return d == Classification::kEasy ? "easy" : "hard";
}

absl::string_view FailureCauseName(FailureCause cause) {
  switch (cause) {
    case FailureCause::kNone:
      return "none";
    case FailureCause::kHardCap:
      return "hard-cap";
    case FailureCause::kDegeneratePolytope:
      return "degenerate-polytope";
  }
  return "unknown";
}

int64_t Transcript::hard_answers() const {
  int64_t hard = 0;
  for (const TranscriptEntry& e : entries) {
    if (e.d == Classification::kHard) ++hard;
  }
  return hard;
}

std::vector<ReleasedAnswer> Transcript::Released() const {
  std::vector<ReleasedAnswer> out;
  out.reserve(entries.size());
  for (const TranscriptEntry& e : entries) out.push_back({e.d, e.a});
  return out;
}

std::optional<Predicate> FixedQuerySource::Next(
    std::span<const ReleasedAnswer> /*history*/) {
  if (next_ >= queries_.size()) return std::nullopt;
  return queries_[next_++];
}

absl::Status ValidateOverrides(const NoiseOverrides& overrides) {
  if (overrides.active() && !overrides.unsafe_testing) {
    return absl::FailedPreconditionError(
        "noise overrides void the privacy guarantee; set unsafe_testing to "
        "use them");
  }
  for (const QueryDraws& d : overrides.injected) {
    if (!(d.threshold_u > 0.0 && d.threshold_u < 1.0)) {
      return absl::InvalidArgumentError(
          "injected threshold_u must be in (0,1)");
    }
  }
  return absl::OkStatus();
}

QueryDraws SessionNoise::Next() {
  QueryDraws d;
  d.threshold_u = UniformOpen01(rng_);
  d.r_noise = SampleUnitLaplace(rng_);
  d.answer_noise = SampleUnitLaplace(rng_);
  if (drawn_ < overrides_.injected.size()) {
    d = overrides_.injected[drawn_];
  } else if (overrides_.zero_noise) {
    d.r_noise = 0.0;
    d.answer_noise = 0.0;
  }
  ++drawn_;
  return d;
}

int64_t ThresholdSupportMax(double gamma) {
  // The relative nudge keeps gamma = 3/20 from losing its top grid point to
  // rounding.
  const double raw = 3.0 / (20.0 * gamma) * (1.0 + 1e-12);
  if (raw >= 1e15) return static_cast<int64_t>(1e15);
  return static_cast<int64_t>(std::floor(raw));
}

namespace {

ThresholdDraw MakeThreshold(double gamma, int64_t j) {
  ThresholdDraw draw;
  draw.j = j;
  draw.t = std::min(0.75 + static_cast<double>(j) * gamma, 0.9);
  return draw;
}

}  // namespace

ThresholdDraw ThresholdFromUniform(double gamma, double u) {
  const int64_t support = ThresholdSupportMax(gamma);
  if (support == 0) return MakeThreshold(gamma, 0);
  // CDF(j) = (1 - 2^-(j+1)) / (1 - 2^-(J+1)); take the smallest j with
  // CDF(j) >= u.
  const double total = -std::expm1(-static_cast<double>(support + 1) *
                                   std::log(2.0));
  const double x = -std::log1p(-u * total) / std::log(2.0);
  double j = std::ceil(x) - 1.0;
  j = std::clamp(j, 0.0, static_cast<double>(support));
  return MakeThreshold(gamma, static_cast<int64_t>(j));
}

ThresholdDraw SampleThreshold(double gamma, Rng& rng) {
  return ThresholdFromUniform(gamma, UniformOpen01(rng));
}

double ThresholdProbability(double gamma, int64_t j) {
  const int64_t support = ThresholdSupportMax(gamma);
  if (j < 0 || j > support) return 0.0;
  const double total = -std::expm1(-static_cast<double>(support + 1) *
                                   std::log(2.0));
  return std::ldexp(1.0, -static_cast<int>(std::min<int64_t>(j + 1, 2000))) /
         total;
}

int64_t HardQueryCap(double multiplier, int64_t m, size_t domain_size) {
  return static_cast<int64_t>(std::ceil(
      multiplier * static_cast<double>(m) *
      std::log(static_cast<double>(domain_size))));
}

nlohmann::json EntryToJson(const TranscriptEntry& e, bool release_view) {
  nlohmann::json doc = {
      {"i", e.index},
      {"query", e.query.ToBitString()},
      {"d", std::string(ClassificationName(e.d))},
      {"a", e.a},
  };
  if (release_view) return doc;
  doc["r"] = e.r;
  doc["r_hat"] = e.r_hat;
  doc["t"] = e.t;
  doc["j"] = e.j;
  doc["hard_count"] = e.hard_count;
  if (e.set_size_before >= 0) {
    doc["set_size_before"] = e.set_size_before;
    doc["set_size_after"] = e.set_size_after;
  }
  if (e.polytope_pairs >= 0) {
    doc["r_stderr"] = e.r_stderr;
    doc["polytope_pairs"] = e.polytope_pairs;
  }
  if (e.forced_hard) doc["forced_hard"] = true;
  return doc;
}

void WriteTranscriptJsonl(const Transcript& transcript, bool release_view,
                          std::ostream& out) {
  for (const TranscriptEntry& e : transcript.entries) {
    out << EntryToJson(e, release_view).dump() << '\n';
  }
  if (transcript.failed()) {
    nlohmann::json doc = {
        {"failure", std::string(FailureCauseName(transcript.failure))},
        {"i", transcript.failure_index},
        {"hard_count", transcript.failure_hard_count},
    };
    out << doc.dump() << '\n';
  }
}

}  // namespace median_mechanism
