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

#ifndef REPDP_ORACLE_H_
#define REPDP_ORACLE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "repdp/kdist.h"

namespace repdp {

// Two probability vectors on a common ordered support; index 0 is the most
// preferred outcome.
class FiniteMechanismPair {
 public:
  static absl::StatusOr<FiniteMechanismPair> Create(std::vector<double> p,
                                                    std::vector<double> p_prime);

  const std::vector<double>& p() const { return p_; }
  const std::vector<double>& p_prime() const { return p_prime_; }
  size_t size() const { return p_.size(); }

  // The pair with the two sides exchanged.
  FiniteMechanismPair Swapped() const;

 private:
  FiniteMechanismPair(std::vector<double> p, std::vector<double> p_prime)
      : p_(std::move(p)), p_prime_(std::move(p_prime)) {}

  std::vector<double> p_;
  std::vector<double> p_prime_;
};

// Checks non-negativity and unit mass (within 1e-12).
absl::Status ValidatePmf(std::span<const double> p);

// Exact law of the most preferred outcome among K independent draws from q:
// A(y) = f(Q(<= y)) - f(Q(< y)). If Pr[K = 0] > 0 an extra last outcome
// ("no output") carries f(0).
absl::StatusOr<std::vector<double>> RepeatedMaxDistribution(
    std::span<const double> q, const RepetitionDistribution& dist);

struct BruteForceResult {
  std::vector<double> law;
  // Pr[K > k_max], the K-mass left out of the enumeration.
  double residual = 0;
  int64_t k_max = 0;
};

// The same law by enumerating k: sum_k pmf(k) * (law of the best of k draws).
absl::StatusOr<BruteForceResult> BruteForceRepeatedMax(
    std::span<const double> q, const RepetitionDistribution& dist,
    double residual = 1e-13);

// Several laws against one enumeration of K; the pmf of K is evaluated once.
absl::StatusOr<std::vector<BruteForceResult>> BruteForceRepeatedMax(
    std::span<const std::vector<double>> qs,
    const RepetitionDistribution& dist, double residual = 1e-13);

// D_lambda(p || p_prime) for lambda in [1, inf]; +inf on support violation.
double RenyiDivergence(std::span<const double> p,
                       std::span<const double> p_prime, double lambda);

double TvDistance(std::span<const double> u, std::span<const double> v);

// Randomized response at epsilon: p = (1, e^eps)/(1 + e^eps), p' swapped.
absl::StatusOr<FiniteMechanismPair> WorstCasePointMass(double epsilon);

struct ConditionedPair {
  FiniteMechanismPair pair;
  double qs = 0;        // Q(S)
  double qs_prime = 0;  // Q'(S)
};

// Restricts both sides to the index set S and renormalizes.
absl::StatusOr<ConditionedPair> ConditionPair(const FiniteMechanismPair& pair,
                                              std::span<const int> subset);

struct ConditionalInstance {
  FiniteMechanismPair pair;
  std::vector<int> subset;  // {0, 1}
  ConditionedPair conditioned;
};

// The three-outcome construction Q = (a e^-s, a e^-s, 1 - 2a e^-s),
// Q' = (a e^{-s-t}, a, 1 - a - a e^{-s-t}) with S = {0, 1}.
absl::StatusOr<ConditionalInstance> WorstCaseConditional(double s, double t,
                                                         double a);

// s + t - lambda log 2 / (lambda - 1), a lower bound on D_lambda(Q_S||Q'_S).
double ConditionalLowerBound(double s, double t, double lambda);

struct Figure8Solution {
  double s = 0;
  double t = 0;
  // max |D_lambda(Q||Q') - rate|, |D_lambda(Q'||Q) - rate|.
  double residual = 0;
};

// Finds (s, t) in [1e-6, 50]^2 with D_lambda(Q||Q') = D_lambda(Q'||Q) = rate
// for the three-outcome construction.
absl::StatusOr<Figure8Solution> SolveFigure8(double lambda, double rate,
                                             double a = 0.01);

// Runs the best-of-K loop `trials` times and returns outcome frequencies
// (with the no-output slot when Pr[K = 0] > 0). Shards use derived seeds
// and are merged in shard order, so the result does not depend on `workers`.
absl::StatusOr<std::vector<double>> MonteCarloBestOfK(
    std::span<const double> q, const RepetitionDistribution& dist,
    int64_t trials, uint64_t seed, int workers = 1);

struct NamedPair {
  std::string name;
  FiniteMechanismPair pair;
};

// Randomized response at eps in {0.1, 0.5, 1, 2}, the three-outcome
// construction at a in {0.01, 0.25}, and 32 random five-outcome pairs with
// bounded log-ratio.
std::vector<NamedPair> OracleCorpus();

}  // namespace repdp

#endif  // REPDP_ORACLE_H_
