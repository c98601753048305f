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

#include "repdp/utility.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "repdp/numeric.h"
#include "repdp/status_macros.h"

namespace repdp {
namespace {

constexpr double kQuantileTolerance = 1e-10;
constexpr double kScoreTolerance = 1e-8;
constexpr int kCdfCheckPoints = 1001;
constexpr int kCalibrationSteps = 80;
constexpr int kBracketPoints = 17;

// Search box in log(gamma) / log(mu), ordered by increasing mean.
constexpr double kTnbLogGammaSmallMean = -1e-9;
constexpr double kTnbLogGammaLargeMean = -27.631021115928547;  // log(1e-12)
constexpr double kPoissonLogMuSmall = -13.815510557964274;     // log(1e-6)
constexpr double kPoissonLogMuLarge = 18.420680743952367;      // log(1e8)

absl::StatusOr<RepetitionDistribution> FamilyMember(
    const CalibrationFamily& family, double t) {
  if (family.kind == CalibrationFamily::Kind::kPoisson) {
    return RepetitionDistribution::Poisson(std::exp(
        kPoissonLogMuSmall + t * (kPoissonLogMuLarge - kPoissonLogMuSmall)));
  }
  return RepetitionDistribution::TruncatedNegativeBinomial(
      family.eta,
      std::exp(kTnbLogGammaSmallMean +
               t * (kTnbLogGammaLargeMean - kTnbLogGammaSmallMean)));
}

struct Candidate {
  double t = 0;
  RepetitionDistribution dist;
  TuningBound bound;
  double epsilon = 0;
  bool feasible = false;
};

}  // namespace

absl::StatusOr<double> ExpectedQuantile(const RepetitionDistribution& dist) {
  ASSIGN_OR_RETURN(
      const double integral,
      AdaptiveSimpson([&dist](double x) { return PgfUnit(dist, x); }, 0, 1,
                      kQuantileTolerance));
  return std::clamp(1 - integral, 0.0, 1.0);
}

absl::StatusOr<double> ExpectedQuantileSeries(
    const RepetitionDistribution& dist) {
  ASSIGN_OR_RETURN(const int64_t limit, SeriesLimit(dist));
  // Smallest terms first.
  double sum = 0;
  for (int64_t k = limit; k >= 1; --k) {
    const double kd = static_cast<double>(k);
    sum += Pmf(dist, k) * kd / (kd + 1);
  }
  return sum;
}

absl::StatusOr<double> SuccessProbability(const RepetitionDistribution& dist,
                                          double p) {
  if (!(p >= 0 && p <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("per-run success probability must be in [0,1], got %g",
                        p));
  }
  if (p == 0) return 0.0;
  return std::clamp(1 - PgfUnit(dist, 1 - p), 0.0, 1.0);
}

ScoreDistribution ScoreDistribution::Uniform(double lo, double hi) {
  ScoreDistribution s;
  s.lo = lo;
  s.hi = hi;
  s.cdf = [lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); };
  s.pdf = [lo, hi](double) { return 1 / (hi - lo); };
  return s;
}

absl::StatusOr<double> ExpectedScore(const RepetitionDistribution& dist,
                                     const ScoreDistribution& score) {
  if (!(score.hi > score.lo)) {
    return absl::InvalidArgumentError("score support must have hi > lo");
  }
  double previous = -1;
  for (int i = 0; i < kCdfCheckPoints; ++i) {
    const double x =
        score.lo + (score.hi - score.lo) * i / (kCdfCheckPoints - 1);
    const double c = score.cdf(x);
    if (!(c >= -1e-12 && c <= 1 + 1e-12) || c < previous) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "score cdf must be non-decreasing with range [0,1]; cdf(%g)=%g", x,
          c));
    }
    previous = c;
  }
  auto integrand = [&](double x) {
    const double c = std::clamp(score.cdf(x), 0.0, 1.0);
    const double log_slope = LogPgfDerivativeUnit(dist, c);
    if (log_slope == -std::numeric_limits<double>::infinity()) return 0.0;
    return x * std::exp(log_slope) * score.pdf(x);
  };
  return AdaptiveSimpson(integrand, score.lo, score.hi, kScoreTolerance);
}

absl::StatusOr<UtilitySummary> Summarize(const RepetitionDistribution& dist,
                                         double per_run_success) {
  UtilitySummary s;
  ASSIGN_OR_RETURN(s.expected_quantile, ExpectedQuantile(dist));
  s.per_run_success = per_run_success;
  ASSIGN_OR_RETURN(s.success_probability,
                   SuccessProbability(dist, per_run_success));
  s.expected_repetitions = Mean(dist);
  for (double factor : {2.0, 5.0, 10.0}) {
    const int64_t k = std::max<int64_t>(
        1, static_cast<int64_t>(std::ceil(factor * s.expected_repetitions)));
    if (!s.tail.empty() && s.tail.back().first == k) continue;
    ASSIGN_OR_RETURN(const double bound, TailBound(dist, k));
    s.tail.emplace_back(k, bound);
  }
  return s;
}

absl::StatusOr<CalibrationResult> Calibrate(
    const PrivacyCurve& base, const CalibrationFamily& family,
    const Budget& budget, const CalibrationObjective& objective,
    const AnalyzeOptions& options) {
  if (!(budget.delta > 0 && budget.delta < 1) || !(budget.epsilon >= 0)) {
    return absl::InvalidArgumentError(
        "budget needs epsilon >= 0 and delta in (0,1)");
  }
  if (family.kind == CalibrationFamily::Kind::kTnb && !(family.eta > -1)) {
    return absl::InvalidArgumentError("eta must exceed -1");
  }
  AnalyzeOptions analyze = options;
  analyze.target_delta = budget.delta;

  ASSIGN_OR_RETURN(const RepetitionDistribution one,
                   RepetitionDistribution::PointMass(1));
  ASSIGN_OR_RETURN(TuningBound single, Analyze(one, base, analyze));
  // The base converts directly, without the tabulated order grid.
  ASSIGN_OR_RETURN(const ApproxDpGuarantee direct,
                   RdpToApproxDp(base, budget.delta));
  if (direct.epsilon < single.approx_dp->epsilon) single.approx_dp = direct;
  if (!(single.approx_dp->epsilon <= budget.epsilon)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "a single run already costs epsilon=%.6g at delta=%g, above the "
        "budget %.6g",
        single.approx_dp->epsilon, budget.delta, budget.epsilon));
  }

  auto evaluate = [&](double t) -> absl::StatusOr<Candidate> {
    Candidate c;
    c.t = t;
    ASSIGN_OR_RETURN(c.dist, FamilyMember(family, t));
    ASSIGN_OR_RETURN(c.bound, Analyze(c.dist, base, analyze));
    c.epsilon = c.bound.approx_dp->epsilon;
    c.feasible = c.epsilon <= budget.epsilon;
    return c;
  };

  // Upper end of the search, in increasing-mean coordinates.
  double t_hi = 1;
  if (objective.kind != CalibrationObjective::Kind::kMaxMean) {
    auto reaches = [&](double t) -> absl::StatusOr<bool> {
      ASSIGN_OR_RETURN(const RepetitionDistribution d, FamilyMember(family, t));
      if (objective.kind == CalibrationObjective::Kind::kTargetMean) {
        return Mean(d) >= objective.target;
      }
      ASSIGN_OR_RETURN(const double beta,
                       SuccessProbability(d, objective.per_run_success));
      return beta >= objective.target;
    };
    ASSIGN_OR_RETURN(const bool reachable, reaches(1));
    if (reachable) {
      double lo = 0;
      double hi = 1;
      for (int i = 0; i < kCalibrationSteps; ++i) {
        const double mid = 0.5 * (lo + hi);
        ASSIGN_OR_RETURN(const bool r, reaches(mid));
        (r ? hi : lo) = mid;
      }
      t_hi = hi;
    }
  }

  auto finish = [&](Candidate c, bool target_met,
                    bool non_monotone) -> absl::StatusOr<CalibrationResult> {
    CalibrationResult out;
    out.distribution = std::move(c.dist);
    out.bound = std::move(c.bound);
    out.achieved_epsilon = c.epsilon;
    out.target_met = target_met;
    out.non_monotone = non_monotone;
    ASSIGN_OR_RETURN(out.summary,
                     Summarize(out.distribution, objective.per_run_success));
    return out;
  };

  std::vector<Candidate> bracket;
  for (int i = 0; i < kBracketPoints; ++i) {
    ASSIGN_OR_RETURN(Candidate c,
                     evaluate(t_hi * i / (kBracketPoints - 1)));
    bracket.push_back(std::move(c));
  }
  int last_feasible = -1;
  int first_infeasible = -1;
  bool monotone = true;
  for (int i = 0; i < kBracketPoints; ++i) {
    if (bracket[i].feasible) {
      if (first_infeasible >= 0) monotone = false;
      last_feasible = i;
    } else if (first_infeasible < 0) {
      first_infeasible = i;
    }
  }
  if (last_feasible < 0) {
    CalibrationResult out;
    out.distribution = one;
    out.bound = std::move(single);
    out.achieved_epsilon = out.bound.approx_dp->epsilon;
    out.single_run = true;
    out.target_met = objective.kind == CalibrationObjective::Kind::kMaxMean;
    ASSIGN_OR_RETURN(out.summary,
                     Summarize(out.distribution, objective.per_run_success));
    return out;
  }
  const bool at_cap = last_feasible == kBracketPoints - 1;
  if (!monotone) {
    return finish(std::move(bracket[last_feasible]),
                  at_cap && objective.kind !=
                                CalibrationObjective::Kind::kMaxMean,
                  true);
  }
  if (at_cap) {
    return finish(std::move(bracket.back()), true, false);
  }
  Candidate good = std::move(bracket[last_feasible]);
  double bad = bracket[first_infeasible].t;
  for (int i = 0; i < kCalibrationSteps; ++i) {
    const double mid = 0.5 * (good.t + bad);
    if (mid <= good.t || mid >= bad) break;
    ASSIGN_OR_RETURN(Candidate c, evaluate(mid));
    if (c.feasible) {
      good = std::move(c);
    } else {
      bad = mid;
    }
  }
  return finish(std::move(good),
                objective.kind == CalibrationObjective::Kind::kMaxMean, false);
}

}  // namespace repdp
