// Copyright 2026 The repdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REPDP_JSON_IO_H_
#define REPDP_JSON_IO_H_

#include <optional>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "repdp/accountant.h"
#include "repdp/kdist.h"
#include "repdp/oracle.h"
#include "repdp/privacy_curve.h"
#include "repdp/tuner.h"
#include "repdp/utility.h"

namespace repdp {

// Orders and epsilons may be infinite; JSON has no infinity, so it is
// written as the string "inf".
nlohmann::json NumberToJson(double x);
absl::StatusOr<double> NumberFromJson(const nlohmann::json& j);

// {"family":"point","k":...} | {"family":"tnb","eta":...,"gamma":...} |
// {"family":"poisson","mu":...} | {"family":"truncated","inner":...,"limit":...}.
// Parsing also accepts "geometric"/"logarithmic" and "mean" in place of
// "gamma".
nlohmann::json DistributionToJson(const RepetitionDistribution& dist);
absl::StatusOr<RepetitionDistribution> DistributionFromJson(
    const nlohmann::json& j);

// {"kind":"pure"|"zcdp"|"rdp_table"|"approx_dp","epsilon":...,"rho":...,
//  "points":[[λ,ε],...],"delta":...,"delta0":...}
nlohmann::json CurveToJson(const PrivacyCurve& curve);
absl::StatusOr<PrivacyCurve> CurveFromJson(const nlohmann::json& j);

// Inline forms: "point:3", "tnb:eta=1,gamma=0.5", "tnb:eta=0,mean=10",
// "geometric:0.5", "logarithmic:mean=10", "poisson:10"; any of them may
// end in ",limit=m". A string starting with '{' is parsed as JSON.
absl::StatusOr<RepetitionDistribution> ParseDistribution(absl::string_view text);

// Inline forms: "pure:1", "zcdp:0.1", "approx:1,1e-6",
// "rdp:2=0.5;4=0.8;inf=3"; ",delta0=x" may follow. '{' starts JSON.
absl::StatusOr<PrivacyCurve> ParseCurve(absl::string_view text);

nlohmann::json TuningBoundToJson(const TuningBound& bound);
nlohmann::json UtilitySummaryToJson(const UtilitySummary& summary);
nlohmann::json TrialToJson(const TrialResult& trial);

// Canonical report: a pure function of the job inputs and seed, so run
// durations are left out.
nlohmann::json ReportToJson(const TuningJobReport& report);

// {"p":[...],"p_prime":[...]}
absl::StatusOr<FiniteMechanismPair> PairFromJson(const nlohmann::json& j);

struct JobConfig {
  std::vector<CandidateSpec> candidates;
  // Required by random-repetition jobs only.
  std::optional<RepetitionDistribution> distribution;
  PrivacyCurve base;
  uint64_t seed = 0;
  TuneOptions options;
};

// {"candidates":[{"id":...,"hyperparameters":{...},"command":[...]}],
//  "distribution":..., "base_guarantee":..., "seed":...,
//  "options":{"workers":...,"wall_clock_cap":...,"k_cap":...,"delta":...}}
// The (eps, delta) conversion uses delta = 1e-6 unless given.
// Relative command paths resolve against `base_dir`.
absl::StatusOr<JobConfig> JobConfigFromJson(const nlohmann::json& j,
                                            const std::string& base_dir);

absl::StatusOr<nlohmann::json> ReadJsonFile(const std::string& path);

}  // namespace repdp

#endif  // REPDP_JSON_IO_H_
