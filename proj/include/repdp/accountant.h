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

// Renyi DP bounds for "run a base algorithm K times and return the best
// run", for each supported law of K, plus the conditional-sampling
// ("repeat until accepted") variant and approximate-DP extensions.

#ifndef REPDP_ACCOUNTANT_H_
#define REPDP_ACCOUNTANT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "repdp/kdist.h"
#include "repdp/privacy_curve.h"

namespace repdp {

// Labels recorded with every bound.
inline constexpr char kMethodBase[] = "base";
inline constexpr char kMethodTnb[] = "tnb";
inline constexpr char kMethodTnbPure[] = "tnb_pure";
inline constexpr char kMethodPoisson[] = "poisson";
inline constexpr char kMethodPointMass[] = "point_mass";
inline constexpr char kMethodGeneric[] = "generic";
inline constexpr char kMethodTruncated[] = "truncated_generic";
inline constexpr char kMethodConditional[] = "conditional";

struct Bound {
  double epsilon = 0;
  std::string method;
  // Inner order used by the bound (lambda_hat); NaN when not applicable.
  double lambda_hat = 0;
  // Order at which the bound was evaluated before monotone closure.
  double lambda_used = 0;
  // Free-form optimizer arguments, e.g. "preset=2" or "p=2,q=inf,r=2".
  std::string detail;
};

// Truncated negative binomial repetition. The bound is
//   eps(l') + (1+eta)(1-1/lh) eps(lh) + (1+eta) log(1/gamma)/lh
//     + log E[K]/(l'-1)
// minimized over l' >= lambda (monotone closure). With lambda_hat unset the
// inner order is also optimized over [1, 1e4], infinity and, for a zCDP base,
// sqrt(log(1/gamma)/rho). lambda_hat = 1 drops the eps(lh) term.
//
// For a pure-DP base at lambda = infinity the result is (2+eta) eps.
absl::StatusOr<Bound> BoundTnb(const PrivacyCurve& base, double eta,
                               double gamma, double lambda,
                               std::optional<double> lambda_hat = std::nullopt);

// (2+eta) eps, the pure-DP guarantee of truncated negative binomial
// repetition of an eps-DP algorithm.
double BoundTnbPure(double epsilon, double eta);

// Closed form for a rho-zCDP base; requires rho <= log(1/gamma).
absl::StatusOr<double> BoundTnbZCdp(double rho, double eta, double gamma,
                                    double lambda);

// Poisson repetition with a (lambda, epsilon)-RDP and an
// (epsilon_hat, delta_hat)-DP base: epsilon + mu delta_hat + log(mu)/(lambda-1).
// Fails unless exp(epsilon_hat) <= 1 + 1/(lambda-1).
absl::StatusOr<double> BoundPoisson(double epsilon, double epsilon_hat,
                                    double delta_hat, double mu,
                                    double lambda);

// Poisson repetition of a base curve. At each order l' >= lambda the
// approximate-DP input uses the largest admissible epsilon_hat,
// log(1 + 1/(l'-1)), with its delta from DeltaForEpsilon.
absl::StatusOr<Bound> BoundPoissonCurve(const PrivacyCurve& base, double mu,
                                        double lambda);

// k eps(lambda) + log(k)/(lambda-1).
absl::StatusOr<double> BoundPointMass(const PrivacyCurve& base, int64_t k,
                                      double lambda);

// Lower bound for k-fold repetition of randomized response:
// k eps - k log(1 + e^-eps)/(lambda-1).
double LowerBoundPointMass(double epsilon, int64_t k, double lambda);

// D_lambda(Bern(p) || Bern(q)); lambda = 1 is KL, infinity the max
// log-ratio.
double BernoulliRenyiDivergence(double p, double q, double lambda);

// Numeric bound for an arbitrary law of K:
//   eps(lambda) + sup (1/(lambda-1)) log(f'(q)^lambda f'(q')^(1-lambda))
// over pairs (q, q') that are consistent with the base guarantee at every
// order in constraint_orders (both directions).
absl::StatusOr<Bound> GenericBound(const RepetitionDistribution& dist,
                                   const PrivacyCurve& base, double lambda,
                                   std::span<const double> constraint_orders);
absl::StatusOr<Bound> GenericBound(const RepetitionDistribution& dist,
                                   const PrivacyCurve& base, double lambda,
                                   double lambda_hat);

// GenericBound for K plus the penalties for running K | K <= limit instead.
absl::StatusOr<Bound> TruncatedBound(
    const RepetitionDistribution& dist, int64_t limit,
    const PrivacyCurve& base, double lambda,
    std::span<const double> constraint_orders);
absl::StatusOr<Bound> TruncatedBound(const RepetitionDistribution& dist,
                                     int64_t limit, const PrivacyCurve& base,
                                     double lambda, double lambda_hat);

// The two extra terms of TruncatedBound:
//   log(1/(1-Pr[K>limit]))/(lambda-1) + log(1 + E[K 1{K>limit}] /
//   (E[K] - E[K 1{K>limit}])).
absl::StatusOr<double> TruncationPenalty(const RepetitionDistribution& dist,
                                         int64_t limit, double lambda);

// Conditional sampling: rerun the base algorithm until its output lands in a
// fixed set S. Holder exponents are given as reciprocals
// (1/p, 1/q, 1/r), which must sum to 1.
struct HolderExponents {
  double inv_p = 0;
  double inv_q = 0;
  double inv_r = 1;
};

struct ConditionalSpec {
  enum class Kind { kAuto, kPreset, kHolder };
  Kind kind = Kind::kAuto;
  int preset = 0;       // 1..5 for kPreset
  double r = 2;         // free parameter of preset 5
  HolderExponents holder;

  static ConditionalSpec Auto() { return {}; }
  static ConditionalSpec Preset(int preset, double r = 2) {
    ConditionalSpec s;
    s.kind = Kind::kPreset;
    s.preset = preset;
    s.r = r;
    return s;
  }
  static ConditionalSpec Holder(double p, double q, double r);
};

// Divergence of order lambda in (1, inf]; used to feed exact divergences.
using DivergenceFunction = std::function<double(double)>;

absl::StatusOr<Bound> ConditionalBound(const PrivacyCurve& forward,
                                       const PrivacyCurve& backward,
                                       double qs_lower, double lambda,
                                       const ConditionalSpec& spec);
absl::StatusOr<Bound> ConditionalBound(const DivergenceFunction& forward,
                                       const DivergenceFunction& backward,
                                       double qs_lower, double lambda,
                                       const ConditionalSpec& spec);

// Poisson repetition of an (epsilon0, delta0)-DP algorithm.
struct ApproxPoissonResult {
  double epsilon = 0;
  double delta = 0;
  // Largest order for which the guarantee is stated.
  double lambda_max = 0;
};
ApproxPoissonResult ApproxPoisson(double epsilon0, double delta0, double mu);

// The guarantee of the repeated algorithm on a grid of orders.
struct BoundPoint {
  double lambda = 0;
  double epsilon = 0;
  std::string method;
  double lambda_hat = 0;
  // Grid order whose value this point inherits by monotone closure.
  double source_lambda = 0;
};

struct TuningBound {
  // The law that was analyzed; for a base with failure mass this is the
  // reweighted law K'.
  RepetitionDistribution distribution;
  RepetitionDistribution executed_distribution;
  PrivacyCurve base;
  std::vector<BoundPoint> points;
  // Failure mass of the output guarantee, 1 - f(1 - delta0).
  double delta = 0;
  std::optional<ApproxDpGuarantee> approx_dp;

  // The points as an RDP table carrying the failure mass.
  absl::StatusOr<PrivacyCurve> AsCurve() const;
  absl::StatusOr<double> EpsilonAt(double lambda) const;
};

struct AnalyzeOptions {
  std::vector<double> lambdas = StandardLambdaGrid();
  // When set, also convert to (epsilon, target_delta)-DP.
  std::optional<double> target_delta;
};

// Picks the bound for the law of K and applies monotone closure over the
// grid. A base with failure mass is routed through ApproxRepetition.
absl::StatusOr<TuningBound> Analyze(const RepetitionDistribution& dist,
                                    const PrivacyCurve& base,
                                    const AnalyzeOptions& options = {});

// Analyzes K' with Pr[K'=k] proportional to Pr[K=k] (1-delta0)^k on the
// failure-free part of base; the result has failure mass 1 - f(1-delta0).
absl::StatusOr<TuningBound> ApproxRepetition(const PrivacyCurve& base,
                                             const RepetitionDistribution& dist,
                                             const AnalyzeOptions& options = {});

// lambda,epsilon_prime,method,lambda_hat
std::string TuningBoundCsv(const TuningBound& bound);

}  // namespace repdp

#endif  // REPDP_ACCOUNTANT_H_
