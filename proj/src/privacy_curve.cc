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

#include "repdp/privacy_curve.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "repdp/numeric.h"

namespace repdp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

absl::Status CheckDelta0(double delta0) {
  if (!(delta0 >= 0 && delta0 <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta0 must be in [0, 1], got %g", delta0));
  }
  return absl::OkStatus();
}

absl::Status CheckNonNegative(double value, const char* name) {
  if (!(value >= 0) || !std::isfinite(value)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s must be finite and >= 0, got %g", name, value));
  }
  return absl::OkStatus();
}

// epsilon_hat at which a single RDP point reaches delta.
double EpsilonForDelta(double lambda, double epsilon, double delta) {
  if (std::isinf(lambda)) return epsilon;
  const double gap = (-std::log(lambda) + (lambda - 1) * std::log1p(-1 / lambda) -
                      std::log(delta)) /
                     (lambda - 1);
  return epsilon + std::max(0.0, gap);
}

double LogRdpPointToDelta(double lambda, double epsilon, double epsilon_hat) {
  return -(lambda - 1) * (epsilon_hat - epsilon) - std::log(lambda) +
         (lambda - 1) * std::log1p(-1 / lambda);
}

// Exact (epsilon_hat, delta) profile of an epsilon-DP pair.
double PureDelta(double epsilon, double epsilon_hat) {
  if (epsilon_hat >= epsilon) return 0;
  return -std::expm1(epsilon_hat - epsilon) / (1 + std::exp(-epsilon));
}

// Inverse of PureDelta.
double PureEpsilon(double epsilon, double delta) {
  // e^eps_hat = e^eps - delta (1 + e^eps).
  const double x = 1 - delta * (1 + std::exp(-epsilon));
  if (!(x > 0)) return 0;
  return std::max(0.0, epsilon + std::log(x));
}

}  // namespace

absl::StatusOr<PrivacyCurve> PrivacyCurve::PureDp(double epsilon,
                                                  double delta0) {
  if (absl::Status s = CheckNonNegative(epsilon, "epsilon"); !s.ok()) return s;
  if (absl::Status s = CheckDelta0(delta0); !s.ok()) return s;
  PrivacyCurve curve;
  curve.kind_ = CurveKind::kPureDp;
  curve.value_ = epsilon;
  curve.delta0_ = delta0;
  return curve;
}

absl::StatusOr<PrivacyCurve> PrivacyCurve::ZCdp(double rho, double delta0) {
  if (absl::Status s = CheckNonNegative(rho, "rho"); !s.ok()) return s;
  if (absl::Status s = CheckDelta0(delta0); !s.ok()) return s;
  PrivacyCurve curve;
  curve.kind_ = CurveKind::kZCdp;
  curve.value_ = rho;
  curve.delta0_ = delta0;
  return curve;
}

absl::StatusOr<PrivacyCurve> PrivacyCurve::RdpTable(
    std::vector<RdpPoint> points, double delta0) {
  if (absl::Status s = CheckDelta0(delta0); !s.ok()) return s;
  if (points.empty()) {
    return absl::InvalidArgumentError("RDP table needs at least one point");
  }
  for (size_t i = 0; i < points.size(); ++i) {
    const RdpPoint& p = points[i];
    if (!(p.lambda > 1)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("RDP order must exceed 1, got %g", p.lambda));
    }
    if (!(p.epsilon >= 0) || std::isnan(p.epsilon)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("RDP epsilon must be >= 0, got %g", p.epsilon));
    }
    if (i > 0) {
      if (!(p.lambda > points[i - 1].lambda)) {
        return absl::InvalidArgumentError(
            "RDP table orders must be strictly increasing");
      }
      if (p.epsilon < points[i - 1].epsilon) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "RDP table is not monotone: epsilon(%g)=%g < epsilon(%g)=%g",
            p.lambda, p.epsilon, points[i - 1].lambda, points[i - 1].epsilon));
      }
    }
  }
  PrivacyCurve curve;
  curve.kind_ = CurveKind::kRdpTable;
  curve.points_ = std::move(points);
  curve.delta0_ = delta0;
  return curve;
}

absl::StatusOr<PrivacyCurve> PrivacyCurve::ApproxDp(double epsilon,
                                                    double delta,
                                                    double delta0) {
  if (absl::Status s = CheckNonNegative(epsilon, "epsilon"); !s.ok()) return s;
  if (!(delta >= 0 && delta <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must be in [0, 1], got %g", delta));
  }
  if (absl::Status s = CheckDelta0(delta0); !s.ok()) return s;
  PrivacyCurve curve;
  curve.kind_ = CurveKind::kApproxDp;
  curve.value_ = epsilon;
  curve.delta_ = delta;
  curve.delta0_ = delta0;
  return curve;
}

double PrivacyCurve::failure_mass() const {
  return std::min(1.0, delta0_ + delta_);
}

PrivacyCurve PrivacyCurve::WithoutFailureMass() const {
  PrivacyCurve copy = *this;
  copy.delta0_ = 0;
  if (copy.kind_ == CurveKind::kApproxDp) {
    copy.kind_ = CurveKind::kPureDp;
    copy.delta_ = 0;
  }
  return copy;
}

std::string PrivacyCurve::ToString() const {
  std::string out;
  switch (kind_) {
    case CurveKind::kPureDp:
      out = absl::StrFormat("pure(epsilon=%g)", value_);
      break;
    case CurveKind::kZCdp:
      out = absl::StrFormat("zcdp(rho=%g)", value_);
      break;
    case CurveKind::kRdpTable:
      out = absl::StrFormat(
          "rdp_table(%s)",
          absl::StrJoin(points_, ",", [](std::string* s, const RdpPoint& p) {
            absl::StrAppendFormat(s, "(%g,%g)", p.lambda, p.epsilon);
          }));
      break;
    case CurveKind::kApproxDp:
      out = absl::StrFormat("approx_dp(epsilon=%g,delta=%g)", value_, delta_);
      break;
  }
  if (delta0_ > 0) absl::StrAppendFormat(&out, "+delta0=%g", delta0_);
  return out;
}

bool operator==(const PrivacyCurve& a, const PrivacyCurve& b) {
  if (a.kind_ != b.kind_ || a.value_ != b.value_ || a.delta_ != b.delta_ ||
      a.delta0_ != b.delta0_ || a.points_.size() != b.points_.size()) {
    return false;
  }
  for (size_t i = 0; i < a.points_.size(); ++i) {
    if (a.points_[i].lambda != b.points_[i].lambda ||
        a.points_[i].epsilon != b.points_[i].epsilon) {
      return false;
    }
  }
  return true;
}

absl::StatusOr<double> EvalCurve(const PrivacyCurve& curve, double lambda) {
  if (!(lambda > 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Renyi order must exceed 1, got %g", lambda));
  }
  if (curve.failure_mass() > 0) {
    return absl::UnimplementedError(absl::StrFormat(
        "%s carries failure mass %g and has no Renyi form; analyze it with "
        "ApproxRepetition",
        curve.ToString(), curve.failure_mass()));
  }
  switch (curve.kind()) {
    case CurveKind::kPureDp:
    case CurveKind::kApproxDp:
      return curve.epsilon();
    case CurveKind::kZCdp:
      if (curve.rho() == 0) return 0.0;
      return curve.rho() * lambda;
    case CurveKind::kRdpTable: {
      const auto& points = curve.points();
      auto it = std::lower_bound(
          points.begin(), points.end(), lambda,
          [](const RdpPoint& p, double l) { return p.lambda < l; });
      if (it == points.end()) return kInf;
      return it->epsilon;
    }
  }
  return absl::InternalError("unknown curve kind");
}

bool HasFiniteOrders(const PrivacyCurve& curve) {
  if (curve.kind() != CurveKind::kRdpTable) return true;
  return std::isfinite(curve.points().front().lambda);
}

std::vector<double> StandardLambdaGrid() {
  std::vector<double> grid = LogSpace(1.25, 1024, 60);
  grid.push_back(kInfiniteOrder);
  return grid;
}

double PureToZCdp(double epsilon) { return 0.5 * epsilon * epsilon; }

double RdpPointToDelta(double lambda, double epsilon, double epsilon_hat) {
  if (std::isinf(lambda)) return epsilon_hat >= epsilon ? 0.0 : 1.0;
  return std::exp(LogRdpPointToDelta(lambda, epsilon, epsilon_hat));
}

absl::StatusOr<ApproxDpGuarantee> RdpToApproxDp(const PrivacyCurve& curve,
                                                double target_delta) {
  if (!(target_delta > 0 && target_delta < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("target delta must be in (0, 1), got %g",
                        target_delta));
  }
  const double delta = target_delta - curve.failure_mass();
  if (!(delta > 0)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "target delta %g does not exceed the failure mass %g", target_delta,
        curve.failure_mass()));
  }
  const PrivacyCurve base = curve.WithoutFailureMass();
  ApproxDpGuarantee out;
  out.delta = target_delta;
  switch (base.kind()) {
    case CurveKind::kPureDp:
    case CurveKind::kApproxDp:
      out.epsilon = PureEpsilon(base.epsilon(), delta);
      out.lambda = kInfiniteOrder;
      return out;
    case CurveKind::kZCdp: {
      if (base.rho() == 0) {
        out.epsilon = 0;
        out.lambda = kInfiniteOrder;
        return out;
      }
      const double rho = base.rho();
      // Continuous in lambda: search lambda - 1 on a log grid and polish.
      const MinimizeResult best = MinimizeLogGrid(
          [rho, delta](double m) {
            return EpsilonForDelta(1 + m, rho * (1 + m), delta);
          },
          1e-6, 1e8, 400);
      out.epsilon = best.value;
      out.lambda = 1 + best.x;
      return out;
    }
    case CurveKind::kRdpTable: {
      out.epsilon = kInf;
      for (const RdpPoint& p : base.points()) {
        const double eps = std::isinf(p.lambda)
                               ? PureEpsilon(p.epsilon, delta)
                               : EpsilonForDelta(p.lambda, p.epsilon, delta);
        if (eps < out.epsilon) {
          out.epsilon = eps;
          out.lambda = p.lambda;
        }
      }
      return out;
    }
  }
  return absl::InternalError("unknown curve kind");
}

absl::StatusOr<double> DeltaForEpsilon(const PrivacyCurve& curve,
                                       double epsilon_hat) {
  if (!(epsilon_hat >= 0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon_hat must be >= 0, got %g", epsilon_hat));
  }
  const PrivacyCurve base = curve.WithoutFailureMass();
  double delta = 1;
  switch (base.kind()) {
    case CurveKind::kPureDp:
    case CurveKind::kApproxDp:
      delta = PureDelta(base.epsilon(), epsilon_hat);
      break;
    case CurveKind::kZCdp: {
      if (base.rho() == 0) {
        delta = 0;
        break;
      }
      const double rho = base.rho();
      const MinimizeResult best = MinimizeLogGrid(
          [rho, epsilon_hat](double m) {
            return LogRdpPointToDelta(1 + m, rho * (1 + m), epsilon_hat);
          },
          1e-6, 1e8, 400);
      delta = std::exp(best.value);
      break;
    }
    case CurveKind::kRdpTable:
      for (const RdpPoint& p : base.points()) {
        const double d =
            std::isinf(p.lambda)
                ? PureDelta(p.epsilon, epsilon_hat)
                : std::exp(LogRdpPointToDelta(p.lambda, p.epsilon,
                                              epsilon_hat));
        delta = std::min(delta, d);
      }
      break;
  }
  return std::min(1.0, delta + curve.failure_mass());
}

}  // namespace repdp
