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

#ifndef REPDP_SOUNDNESS_H_
#define REPDP_SOUNDNESS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "repdp/kdist.h"
#include "repdp/oracle.h"
#include "repdp/privacy_curve.h"

namespace repdp {

struct SoundnessRow {
  std::string instance;
  std::string distribution;
  double lambda = 0;
  double exact = 0;  // D_lambda(A(x) || A(x')) from the oracle
  double bound = 0;  // accountant bound for the symmetric base curve
  double slack = 0;  // bound - exact
  std::string method;
};

struct SoundnessOptions {
  std::vector<double> lambdas = {1.5, 2, 3, 4, 8, 16, 32, 64};
  int workers = 1;
};

// Point masses k = 1..10, truncated negative binomials with eta in
// {-0.5, 0, 0.5, 1, 2} and means {2, 10, 100}, Poisson with mu in
// {1, 10, 100}, and truncations at m in {3, 10} of a geometric, a
// logarithmic and a Poisson law, each with mean 10.
std::vector<RepetitionDistribution> SoundnessDistributions();

// Tabulated RDP curve of the pair in both directions (the larger of the two
// divergences at each order), on a dense order grid plus infinity.
absl::StatusOr<PrivacyCurve> ExactBaseCurve(const FiniteMechanismPair& pair,
                                            const std::vector<double>& extra);

// Compares every accountant bound with the exact divergence of the repeated
// mechanism, in both directions, for every pair, distribution and order.
absl::StatusOr<std::vector<SoundnessRow>> RunSoundnessMatrix(
    const std::vector<NamedPair>& corpus,
    const std::vector<RepetitionDistribution>& distributions,
    const SoundnessOptions& options = SoundnessOptions());

// Randomized response repeated a fixed k times: the exact divergence (larger
// direction) against k eps - k log(1 + e^-eps)/(lambda-1) from below and
// k eps + log(k)/(lambda-1) from above.
struct SandwichRow {
  double epsilon = 0;
  int64_t k = 0;
  double lambda = 0;
  double lower = 0;
  double exact = 0;
  double upper = 0;
};

absl::StatusOr<std::vector<SandwichRow>> PointMassSandwich(
    const std::vector<double>& epsilons, const std::vector<int64_t>& ks,
    const std::vector<double>& lambdas);

// Two soundness rows per sandwich row, one per side; slack < 0 on either
// side is a violation.
std::vector<SoundnessRow> SandwichToSoundness(
    const std::vector<SandwichRow>& rows);

// instance,distribution,lambda,exact,bound,slack,method
std::string SoundnessCsv(const std::vector<SoundnessRow>& rows);

}  // namespace repdp

#endif  // REPDP_SOUNDNESS_H_
