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

#ifndef REPDP_TUNER_H_
#define REPDP_TUNER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "repdp/accountant.h"
#include "repdp/kdist.h"
#include "repdp/privacy_curve.h"

namespace repdp {

// What a candidate sees for one run.
struct RunContext {
  int64_t run_index = 0;
  std::string candidate_id;
  nlohmann::json hyperparameters;
  uint64_t seed = 0;
};

struct TrialOutcome {
  double score = 0;
  std::string payload;
};

using ScoreFunction =
    std::function<absl::StatusOr<TrialOutcome>(const RunContext&)>;

// A candidate is either an in-process callable or an external command. The
// command receives {"hyperparameters":...,"seed":...,"run_index":...} on stdin and
// must print {"score":...,"payload":...}. The placeholders {seed}, {run_index}
// and {candidate} in arguments are substituted.
struct CandidateSpec {
  std::string id;
  nlohmann::json hyperparameters = nlohmann::json::object();
  std::vector<std::string> command;
  ScoreFunction callable;
};

struct TrialResult {
  int64_t run_index = 0;
  std::string candidate_id;
  // nullopt is the no-output sentinel, ranked below every finite score.
  std::optional<double> score;
  std::string payload;
  double duration_seconds = 0;
  uint64_t seed_used = 0;
  std::string error;
};

struct TuneOptions {
  int workers = 1;
  std::optional<double> wall_clock_cap_seconds;
  std::optional<int64_t> k_cap;
  AnalyzeOptions analyze;
};

struct TuningJobReport {
  std::string procedure;  // "random_repetition" or "until_success"
  // nullopt when no run happened (K = 0) or nothing was accepted.
  std::optional<TrialResult> best;
  int64_t k_drawn = 0;
  std::vector<TrialResult> trials;
  // The law actually executed (truncated when capped).
  std::optional<RepetitionDistribution> distribution;
  // Absent when the job was aborted by the wall-clock cap.
  std::optional<TuningBound> privacy;
  uint64_t master_seed = 0;
  bool aborted = false;
  // until_success only: max_attempts was hit; the privacy claim does not
  // cover this outcome.
  bool outside_model = false;
  std::string note;
};

// Index of the best trial: highest score, earliest run on ties, sentinels
// last. nullopt for an empty list.
std::optional<size_t> SelectBest(const std::vector<TrialResult>& trials);

// Random-repetition tuning: draw K once, run K uniformly chosen candidates,
// return the best with the accountant's bound for the executed law.
absl::StatusOr<TuningJobReport> Tune(const std::vector<CandidateSpec>& candidates,
                                     const RepetitionDistribution& dist,
                                     const PrivacyCurve& base, uint64_t seed,
                                     const TuneOptions& options = TuneOptions());

struct UntilSuccessOptions {
  int64_t max_attempts = 1000000;
  std::vector<double> lambdas = StandardLambdaGrid();
};

// Conditional sampling: run uniformly chosen candidates until one scores at
// least `accept`; privacy from the conditional bound with Q(S) >= qs_lower.
absl::StatusOr<TuningJobReport> TuneUntilSuccess(
    const std::vector<CandidateSpec>& candidates, double accept,
    const PrivacyCurve& forward, const PrivacyCurve& backward,
    double qs_lower, uint64_t seed,
    const UntilSuccessOptions& options = UntilSuccessOptions());

struct SelectionMechanism {
  enum class Kind { kRepeatedLaplace, kExponential };
  Kind kind = Kind::kRepeatedLaplace;
  RepetitionDistribution dist;  // kRepeatedLaplace only

  static SelectionMechanism RepeatedLaplace(RepetitionDistribution d) {
    return {Kind::kRepeatedLaplace, std::move(d)};
  }
  static SelectionMechanism Exponential() { return {Kind::kExponential, {}}; }
};

struct SelectionOutcome {
  // nullopt when K = 0.
  std::optional<int64_t> chosen;
  std::optional<double> noisy_score;
  int64_t k_drawn = 0;
};

struct SelectionReport {
  std::vector<SelectionOutcome> outcomes;
  // Pure-DP guarantee of the mechanism (lambda = inf).
  double epsilon = 0;
  // The exponential mechanism's guarantee at the same noise level.
  double exponential_epsilon = 0;
  // Fraction of jobs with u(chosen) >= max u - (20/eps) log m.
  double success_rate = 0;
};

// Private selection over `utilities` (sensitivity 1). Repeated Laplace picks
// a uniform j and reports u_j + Laplace(1/eps) each run and keeps the best;
// the exponential mechanism samples j with probability ~ exp(eps u_j / 2).
// Runs `jobs` independent jobs with seeds derived from `seed`.
absl::StatusOr<SelectionReport> SelectionDemo(
    const std::vector<double>& utilities, double epsilon,
    const SelectionMechanism& mechanism, uint64_t seed, int64_t jobs = 1);

}  // namespace repdp

#endif  // REPDP_TUNER_H_
