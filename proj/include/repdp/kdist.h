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

// Repetition-count distributions: the law of the number K of base-algorithm
// runs. Four families are supported: a point mass, the truncated negative
// binomial (which contains the geometric and logarithmic laws), Poisson, and
// the truncation {K | K <= m} of any of these.

#ifndef REPDP_KDIST_H_
#define REPDP_KDIST_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "repdp/rng.h"

namespace repdp {

// Residual probability mass below which infinite series are cut.
inline constexpr double kSeriesResidual = 1e-12;

// |eta| below this uses the logarithmic branch of the truncated negative
// binomial formulas.
inline constexpr double kLogarithmicBranchEta = 1e-7;

// Largest truncation limit accepted (the truncated law is stored as a table).
inline constexpr int64_t kMaxTruncationLimit = 10'000'000;

enum class Family {
  kPointMass,
  kTruncatedNegativeBinomial,
  kPoisson,
  kTruncated,
};

class RepetitionDistribution {
 public:
  // PointMass(1).
  RepetitionDistribution() = default;

  static absl::StatusOr<RepetitionDistribution> PointMass(int64_t k);
  static absl::StatusOr<RepetitionDistribution> TruncatedNegativeBinomial(
      double eta, double gamma);
  // Geometric(gamma) == TruncatedNegativeBinomial(1, gamma).
  static absl::StatusOr<RepetitionDistribution> Geometric(double gamma);
  // Logarithmic(gamma) == TruncatedNegativeBinomial(0, gamma).
  static absl::StatusOr<RepetitionDistribution> Logarithmic(double gamma);
  static absl::StatusOr<RepetitionDistribution> Poisson(double mu);
  // K conditioned on K <= limit.
  static absl::StatusOr<RepetitionDistribution> Truncated(
      const RepetitionDistribution& inner, int64_t limit);

  Family family() const { return family_; }

  // Family parameters. Accessors for other families return 0.
  int64_t point() const { return count_; }
  double eta() const { return first_; }
  double gamma() const { return second_; }
  double mu() const { return first_; }
  int64_t limit() const { return count_; }

  // Only valid for kTruncated.
  const RepetitionDistribution& inner() const { return *inner_; }
  // Renormalized probabilities of the truncated law on {0, ..., limit}.
  std::span<const double> truncated_pmf() const { return *table_; }
  // Pr[inner <= limit].
  double inner_mass_within_limit() const { return inner_mass_; }

  bool is_logarithmic() const;

  // Short human-readable form, e.g. "tnb(eta=0,gamma=0.5)".
  std::string ToString() const;

  friend bool operator==(const RepetitionDistribution& a,
                         const RepetitionDistribution& b);

 private:
  Family family_ = Family::kPointMass;
  double first_ = 0;
  double second_ = 0;
  int64_t count_ = 1;
  double inner_mass_ = 1;
  std::shared_ptr<const RepetitionDistribution> inner_;
  std::shared_ptr<const std::vector<double>> table_;
};

// Pr[K = k]. Zero for negative k.
double Pmf(const RepetitionDistribution& dist, int64_t k);

double Mean(const RepetitionDistribution& dist);

// Pr[K = 0] = f(0).
double ProbabilityOfZero(const RepetitionDistribution& dist);

// Supremum of the PGF's domain of convergence: 1/(1-gamma) for the truncated
// negative binomial, +inf otherwise.
double PgfDomainUpper(const RepetitionDistribution& dist);

// Probability generating function f(x) = E[x^K] and its derivative, on
// [0, PgfDomainUpper).
absl::StatusOr<double> Pgf(const RepetitionDistribution& dist, double x);
absl::StatusOr<double> PgfDerivative(const RepetitionDistribution& dist,
                                     double x);

// Unchecked versions for x in [0, 1], used in inner loops.
double PgfUnit(const RepetitionDistribution& dist, double x);
// log f'(x); -inf where f'(x) = 0.
double LogPgfDerivativeUnit(const RepetitionDistribution& dist, double x);

// Smallest k such that Pr[K > k] < residual.
absl::StatusOr<int64_t> SeriesLimit(const RepetitionDistribution& dist,
                                    double residual = kSeriesResidual);

// Chernoff-style upper bound on Pr[K >= k]: min over t > 0 of
// f(e^t) e^{-tk}, clamped to 1.
absl::StatusOr<double> TailBound(const RepetitionDistribution& dist,
                                 int64_t k);

struct TruncationStats {
  double tail_probability = 0;  // Pr[K > m]
  double tail_mean = 0;         // E[K 1{K > m}]
};

absl::StatusOr<TruncationStats> ComputeTruncationStats(
    const RepetitionDistribution& dist, int64_t limit);

// The law K' with Pr[K' = k] proportional to Pr[K = k] survival^k; its PGF is
// f(x survival) / f(survival). Every family is closed under this reweighting.
absl::StatusOr<RepetitionDistribution> ReweightBySurvival(
    const RepetitionDistribution& dist, double survival);

// gamma such that TruncatedNegativeBinomial(eta, gamma) has the given mean
// (> 1).
absl::StatusOr<double> TnbGammaForMean(double eta, double mean);

// Inverse-CDF sampler with a lazily extended CDF table. Not thread-safe; give
// each thread its own sampler.
class RepetitionSampler {
 public:
  // Table entries kept before switching to the exact tail sampler.
  static constexpr int64_t kTableCap = int64_t{1} << 20;

  explicit RepetitionSampler(RepetitionDistribution dist);

  int64_t Sample(Rng& rng);

  const RepetitionDistribution& distribution() const { return dist_; }

 private:
  void ExtendTo(double u);

  RepetitionDistribution dist_;
  std::vector<double> cdf_;
  double compensation_ = 0;
  bool complete_ = false;
};

// One draw; builds a throwaway sampler.
int64_t Sample(const RepetitionDistribution& dist, Rng& rng);

}  // namespace repdp

#endif  // REPDP_KDIST_H_
