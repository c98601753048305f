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

#ifndef REPDP_UTILITY_H_
#define REPDP_UTILITY_H_

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "repdp/accountant.h"
#include "repdp/kdist.h"
#include "repdp/privacy_curve.h"

namespace repdp {

// E[K/(K+1)] = 1 - int_0^1 f(x) dx: the expected quantile of the best of K
// uniform scores. K = 0 contributes 0.
absl::StatusOr<double> ExpectedQuantile(const RepetitionDistribution& dist);

// Same quantity by direct summation of pmf(k) k/(k+1).
absl::StatusOr<double> ExpectedQuantileSeries(
    const RepetitionDistribution& dist);

// 1 - f(1 - p): probability that at least one of the K runs succeeds when
// each run succeeds independently with probability p.
absl::StatusOr<double> SuccessProbability(const RepetitionDistribution& dist,
                                          double p);

// A continuous score law on [lo, hi].
struct ScoreDistribution {
  std::function<double(double)> cdf;
  std::function<double(double)> pdf;
  double lo = 0;
  double hi = 1;

  static ScoreDistribution Uniform(double lo = 0, double hi = 1);
};

// E[Y] for the best score Y, i.e. int x f'(cdf(x)) pdf(x) dx. K = 0 is
// scored as 0.
absl::StatusOr<double> ExpectedScore(const RepetitionDistribution& dist,
                                     const ScoreDistribution& score);

struct UtilitySummary {
  double expected_quantile = 0;
  double per_run_success = 0;
  double success_probability = 0;
  double expected_repetitions = 0;
  // (k, upper bound on Pr[K >= k]).
  std::vector<std::pair<int64_t, double>> tail;
};

absl::StatusOr<UtilitySummary> Summarize(const RepetitionDistribution& dist,
                                         double per_run_success);

struct Budget {
  double epsilon = 0;
  double delta = 0;
};

struct CalibrationFamily {
  enum class Kind { kTnb, kPoisson };
  Kind kind = Kind::kTnb;
  double eta = 0;  // kTnb only

  static CalibrationFamily Tnb(double eta) { return {Kind::kTnb, eta}; }
  static CalibrationFamily Poisson() { return {Kind::kPoisson, 0}; }
};

struct CalibrationObjective {
  enum class Kind { kMaxMean, kTargetMean, kTargetSuccess };
  Kind kind = Kind::kMaxMean;
  double target = 0;  // E[K] or success probability
  // Per-run success probability used for kTargetSuccess and the summary.
  double per_run_success = 0.01;
};

struct CalibrationResult {
  RepetitionDistribution distribution;
  TuningBound bound;
  UtilitySummary summary;
  double achieved_epsilon = 0;
  // The objective's target was reached within the budget.
  bool target_met = false;
  // No repetition law in the family fits; the single run is returned.
  bool single_run = false;
  // Feasibility was not monotone along the search bracket; the answer comes
  // from a grid scan instead of bisection.
  bool non_monotone = false;
};

// Finds the law in `family` with the largest mean whose converted (eps, delta)
// guarantee fits `budget`, capped at the objective's target when given.
absl::StatusOr<CalibrationResult> Calibrate(
    const PrivacyCurve& base, const CalibrationFamily& family,
    const Budget& budget,
    const CalibrationObjective& objective = CalibrationObjective(),
    const AnalyzeOptions& options = AnalyzeOptions());

}  // namespace repdp

#endif  // REPDP_UTILITY_H_
