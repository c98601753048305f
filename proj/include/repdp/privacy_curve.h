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

// Privacy guarantees of a base algorithm, expressed as a Renyi DP curve
// lambda -> epsilon(lambda), and conversions to approximate DP.

#ifndef REPDP_PRIVACY_CURVE_H_
#define REPDP_PRIVACY_CURVE_H_

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace repdp {

// The order lambda = infinity. Orders are doubles and infinity is the only
// value used to mean "pure DP"; large finite orders are never substituted.
inline constexpr double kInfiniteOrder =
    std::numeric_limits<double>::infinity();

enum class CurveKind {
  kPureDp,
  kZCdp,
  kRdpTable,
  kApproxDp,
};

struct RdpPoint {
  double lambda = 0;
  double epsilon = 0;
};

class PrivacyCurve {
 public:
  // PureDp(0).
  PrivacyCurve() = default;

  static absl::StatusOr<PrivacyCurve> PureDp(double epsilon,
                                             double delta0 = 0);
  static absl::StatusOr<PrivacyCurve> ZCdp(double rho, double delta0 = 0);
  // Points must have strictly increasing lambda > 1 (an infinite order is
  // allowed last) and non-decreasing epsilon.
  static absl::StatusOr<PrivacyCurve> RdpTable(std::vector<RdpPoint> points,
                                               double delta0 = 0);
  // (epsilon, delta)-DP. With delta = 0 this is PureDp(epsilon).
  static absl::StatusOr<PrivacyCurve> ApproxDp(double epsilon, double delta,
                                               double delta0 = 0);

  CurveKind kind() const { return kind_; }
  double epsilon() const { return value_; }
  double rho() const { return value_; }
  double delta() const { return delta_; }
  double delta0() const { return delta0_; }
  const std::vector<RdpPoint>& points() const { return points_; }

  // Total failure mass: delta0 plus, for kApproxDp, delta. (epsilon,delta)-DP
  // is the same as delta-approximate (infinity, epsilon)-RDP.
  double failure_mass() const;

  // The same guarantee with the failure mass removed; kApproxDp becomes
  // kPureDp.
  PrivacyCurve WithoutFailureMass() const;

  std::string ToString() const;

  friend bool operator==(const PrivacyCurve& a, const PrivacyCurve& b);

 private:
  CurveKind kind_ = CurveKind::kPureDp;
  double value_ = 0;
  double delta_ = 0;
  double delta0_ = 0;
  std::vector<RdpPoint> points_;
};

// epsilon(lambda) for lambda in (1, infinity]. Tables use the smallest
// tabulated order >= lambda and return +inf past the last one. A curve with
// failure mass is evaluated on its failure-free part; kApproxDp with
// delta > 0 is rejected since it has no Renyi form without a failure mass
// (see ApproxRepetition).
absl::StatusOr<double> EvalCurve(const PrivacyCurve& curve, double lambda);

// True when EvalCurve(curve, lambda) is finite for some finite lambda.
bool HasFiniteOrders(const PrivacyCurve& curve);

// 60 log-spaced orders on [1.25, 1024] followed by infinity.
std::vector<double> StandardLambdaGrid();

double PureToZCdp(double epsilon);

// (lambda, epsilon)-RDP implies (epsilon_hat, delta)-DP with
// delta = exp(-(lambda-1)(epsilon_hat-epsilon)) / lambda * (1-1/lambda)^(lambda-1).
double RdpPointToDelta(double lambda, double epsilon, double epsilon_hat);

struct ApproxDpGuarantee {
  double epsilon = 0;
  double delta = 0;
  // Order at which the conversion was attained (infinity for pure DP).
  double lambda = 0;
};

// Smallest epsilon with (epsilon, target_delta)-DP. Any failure mass on the
// curve is paid out of target_delta.
absl::StatusOr<ApproxDpGuarantee> RdpToApproxDp(const PrivacyCurve& curve,
                                                double target_delta);

// Smallest delta (clamped to 1) with (epsilon_hat, delta)-DP, including the
// curve's failure mass.
absl::StatusOr<double> DeltaForEpsilon(const PrivacyCurve& curve,
                                       double epsilon_hat);

}  // namespace repdp

#endif  // REPDP_PRIVACY_CURVE_H_
