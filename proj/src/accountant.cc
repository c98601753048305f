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

#include "repdp/accountant.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "repdp/numeric.h"
#include "repdp/status_macros.h"

namespace repdp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Upper end of the order searches.
constexpr double kMaxSearchOrder = 1e4;
constexpr int kLambdaHatGridPoints = 200;
constexpr int kOuterGridPoints = 200;
constexpr int kPoissonOuterGridPoints = 60;

// Generic bound search.
constexpr int kGenericGridPoints = 2001;
constexpr int kBisectionSteps = 64;
constexpr double kRefineTolerance = 1e-12;
constexpr double kMarginStep = 1e-9;

constexpr double kHolderTolerance = 1e-12;

absl::Status CheckOrder(double lambda) {
  if (!(lambda > 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Renyi order must exceed 1, got %g", lambda));
  }
  return absl::OkStatus();
}

bool IsPureLike(const PrivacyCurve& curve) {
  return curve.kind() == CurveKind::kPureDp ||
         curve.kind() == CurveKind::kApproxDp;
}

std::string FormatOrder(double x) {
  return std::isinf(x) ? "inf" : absl::StrFormat("%.17g", x);
}

// Orders l' >= lambda searched by the monotone closure inside a bound.
std::vector<double> OuterOrders(double lambda, int n) {
  if (std::isinf(lambda)) return {kInf};
  std::vector<double> orders;
  if (lambda < kMaxSearchOrder) {
    orders = LogSpace(lambda, kMaxSearchOrder, n);
  } else {
    orders = {lambda};
  }
  orders.push_back(kInf);
  return orders;
}

// Smallest q' <= q with both Bernoulli divergences of order `order` at most
// epsilon_hat. Returns a point on the infeasible side of the boundary, so the
// penalty is never underestimated.
double SmallestFeasiblePartner(double q, double order, double epsilon_hat) {
  if (q <= 0) return 0;
  const double pure =
      std::max({0.0, q * std::exp(-epsilon_hat),
                1 - std::exp(epsilon_hat) * (1 - q)});
  if (std::isinf(order)) return pure;
  auto feasible = [&](double qp) {
    return BernoulliRenyiDivergence(q, qp, order) <= epsilon_hat &&
           BernoulliRenyiDivergence(qp, q, order) <= epsilon_hat;
  };
  // D_order <= D_inf, so the pure-DP boundary is feasible.
  double lo = 0;
  double hi = std::min(q, pure);
  if (hi <= 0) return 0;
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

struct Constraint {
  double order;
  double epsilon_hat;
};

// (lambda-1) times the generic penalty at q, or the lambda = inf limit.
class GenericPenalty {
 public:
  GenericPenalty(const RepetitionDistribution& dist, double lambda,
                 std::vector<Constraint> constraints)
      : dist_(dist), lambda_(lambda), constraints_(std::move(constraints)) {}

  double Partner(double q, size_t* binding = nullptr) const {
    double qp = 0;
    size_t arg = 0;
    for (size_t i = 0; i < constraints_.size(); ++i) {
      const double candidate = SmallestFeasiblePartner(
          q, constraints_[i].order, constraints_[i].epsilon_hat);
      if (candidate > qp) {
        qp = candidate;
        arg = i;
      }
    }
    if (binding != nullptr) *binding = arg;
    return qp;
  }

  double operator()(double q) const {
    q = std::clamp(q, 0.0, 1.0);
    const double qp = Partner(q);
    const double a = LogPgfDerivativeUnit(dist_, q);
    if (qp >= q) return a;
    const double b = LogPgfDerivativeUnit(dist_, qp);
    if (a == -kInf) return -kInf;
    if (b == -kInf) return kInf;
    if (std::isinf(lambda_)) return a - b;
    return b + lambda_ * (a - b);
  }

 private:
  const RepetitionDistribution& dist_;
  double lambda_;
  std::vector<Constraint> constraints_;
};

absl::Status CheckHolder(const HolderExponents& h) {
  for (double v : {h.inv_p, h.inv_q, h.inv_r}) {
    if (!(v >= -kHolderTolerance && v <= 1 + kHolderTolerance)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "Holder exponents must lie in [1, inf]; got reciprocal %g", v));
    }
  }
  const double sum = h.inv_p + h.inv_q + h.inv_r;
  if (std::abs(sum - 1) > kHolderTolerance) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Holder identity 1/p + 1/q + 1/r = 1 violated: sum is %.17g", sum));
  }
  return absl::OkStatus();
}

std::string HolderDetail(const HolderExponents& h) {
  auto inv = [](double x) {
    return x == 0 ? std::string("inf") : absl::StrFormat("%.6g", 1 / x);
  };
  return absl::StrCat("p=", inv(h.inv_p), ",q=", inv(h.inv_q),
                      ",r=", inv(h.inv_r));
}

absl::StatusOr<double> HolderValue(const DivergenceFunction& forward,
                                   const DivergenceFunction& backward,
                                   double qs_lower, double lambda,
                                   const HolderExponents& h) {
  RETURN_IF_ERROR(CheckHolder(h));
  const double a = std::clamp(h.inv_p, 0.0, 1.0);
  const double b = std::clamp(h.inv_q, 0.0, 1.0);
  const double c = std::clamp(h.inv_r, 0.0, 1.0);
  if (std::isinf(lambda)) return forward(kInf) + backward(kInf);
  const double backward_coefficient = (lambda + b - 2) / (lambda - 1);
  if (backward_coefficient < 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "order %g with 1/q=%g needs lambda + 1/q >= 2", lambda, b));
  }
  const double forward_order = c == 0 ? kInf : (lambda - a) / c;
  const double forward_term =
      (lambda - a - c) / (lambda - 1) * forward(forward_order);
  const double backward_term =
      backward_coefficient == 0
          ? 0.0
          : backward_coefficient * backward(lambda + b - 1);
  const double log_term = (c + 1) / (lambda - 1) * -std::log(qs_lower);
  return forward_term + backward_term + log_term;
}

absl::StatusOr<HolderExponents> PresetExponents(int preset, double r) {
  switch (preset) {
    case 2:
      return HolderExponents{0, 0, 1};
    case 3:
      return HolderExponents{1, 0, 0};
    case 4:
      return HolderExponents{0, 1, 0};
    case 5:
      if (!(r >= 1)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("preset 5 needs r >= 1, got %g", r));
      }
      return HolderExponents{1 - 1 / r, 0, 1 / r};
    default:
      return absl::InvalidArgumentError(
          absl::StrFormat("conditional preset must be 1..5, got %d", preset));
  }
}

absl::StatusOr<Bound> PresetBound(const DivergenceFunction& forward,
                                  const DivergenceFunction& backward,
                                  double qs_lower, double lambda, int preset,
                                  double r) {
  Bound bound;
  bound.method = kMethodConditional;
  bound.lambda_hat = kNaN;
  bound.lambda_used = lambda;
  if (preset == 1) {
    // D_inf(Q_S||Q'_S) <= D_inf(Q||Q') + D_inf(Q'||Q), and D_lambda <= D_inf.
    bound.epsilon = forward(kInf) + backward(kInf);
    bound.detail = "preset=1";
    return bound;
  }
  ASSIGN_OR_RETURN(const HolderExponents h, PresetExponents(preset, r));
  ASSIGN_OR_RETURN(bound.epsilon,
                   HolderValue(forward, backward, qs_lower, lambda, h));
  bound.detail = preset == 5 ? absl::StrFormat("preset=5,r=%g", r)
                             : absl::StrFormat("preset=%d", preset);
  return bound;
}

absl::StatusOr<Bound> RawBound(const RepetitionDistribution& dist,
                               const PrivacyCurve& base, double lambda) {
  switch (dist.family()) {
    case Family::kPointMass: {
      if (dist.point() == 1) {
        ASSIGN_OR_RETURN(const double eps, EvalCurve(base, lambda));
        return Bound{eps, kMethodBase, kNaN, lambda, ""};
      }
      ASSIGN_OR_RETURN(const double eps,
                       BoundPointMass(base, dist.point(), lambda));
      return Bound{eps, kMethodPointMass, kNaN, lambda, ""};
    }
    case Family::kTruncatedNegativeBinomial:
      return BoundTnb(base, dist.eta(), dist.gamma(), lambda);
    case Family::kPoisson:
      return BoundPoissonCurve(base, dist.mu(), lambda);
    case Family::kTruncated: {
      std::vector<double> orders;
      if (!std::isinf(lambda)) orders.push_back(lambda);
      orders.push_back(kInf);
      return TruncatedBound(dist.inner(), dist.limit(), base, lambda, orders);
    }
  }
  return absl::InternalError("unknown family");
}

absl::StatusOr<std::vector<double>> SortedOrders(
    const std::vector<double>& lambdas) {
  if (lambdas.empty()) {
    return absl::InvalidArgumentError("lambda grid is empty");
  }
  std::vector<double> sorted = lambdas;
  for (double l : sorted) RETURN_IF_ERROR(CheckOrder(l));
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return sorted;
}

absl::StatusOr<TuningBound> AnalyzeExact(const RepetitionDistribution& dist,
                                         const PrivacyCurve& base,
                                         const std::vector<double>& lambdas) {
  ASSIGN_OR_RETURN(const std::vector<double> orders, SortedOrders(lambdas));
  std::vector<Bound> raw;
  raw.reserve(orders.size());
  for (double lambda : orders) {
    ASSIGN_OR_RETURN(Bound b, RawBound(dist, base, lambda));
    // Bounds below zero (E[K] < 1) carry no information beyond D >= 0.
    b.epsilon = std::max(b.epsilon, 0.0);
    raw.push_back(std::move(b));
  }
  TuningBound out;
  out.distribution = dist;
  out.executed_distribution = dist;
  out.base = base;
  out.points.resize(orders.size());
  // Monotone closure: (l', eps)-RDP implies (l, eps)-RDP for l <= l'.
  size_t best = orders.size() - 1;
  for (size_t i = orders.size(); i-- > 0;) {
    if (raw[i].epsilon <= raw[best].epsilon) best = i;
    const Bound& b = raw[best];
    out.points[i] = BoundPoint{orders[i], b.epsilon,
                               b.detail.empty()
                                   ? b.method
                                   : absl::StrCat(b.method, "(", b.detail, ")"),
                               b.lambda_hat, orders[best]};
  }
  return out;
}

}  // namespace

absl::StatusOr<Bound> BoundTnb(const PrivacyCurve& base, double eta,
                               double gamma, double lambda,
                               std::optional<double> lambda_hat) {
  RETURN_IF_ERROR(CheckOrder(lambda));
  ASSIGN_OR_RETURN(const RepetitionDistribution dist,
                   RepetitionDistribution::TruncatedNegativeBinomial(eta, gamma));
  if (lambda_hat.has_value() && !(*lambda_hat >= 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("lambda_hat must be >= 1, got %g", *lambda_hat));
  }
  // Surfaces failure-mass errors before any special case.
  ASSIGN_OR_RETURN(const double eps_at_lambda, EvalCurve(base, lambda));
  if (std::isinf(lambda) && IsPureLike(base)) {
    return Bound{BoundTnbPure(eps_at_lambda, eta), kMethodTnbPure, kInf, kInf,
                 ""};
  }
  const double log_inv_gamma = -std::log(gamma);
  const double log_mean = std::log(Mean(dist));
  const double weight = 1 + eta;

  std::vector<double> hats;
  if (lambda_hat.has_value()) {
    hats = {*lambda_hat};
  } else {
    hats = LogSpace(1, kMaxSearchOrder, kLambdaHatGridPoints);
    hats.push_back(kInf);
    if (base.kind() == CurveKind::kZCdp && base.rho() > 0) {
      const double analytic = std::sqrt(log_inv_gamma / base.rho());
      if (analytic >= 1) hats.push_back(analytic);
    }
    std::sort(hats.begin(), hats.end());
  }
  double best_inner = kInf;
  double best_hat = hats.front();
  for (double hat : hats) {
    double inner;
    if (hat == 1) {
      inner = weight * log_inv_gamma;
    } else {
      ASSIGN_OR_RETURN(const double eps_hat, EvalCurve(base, hat));
      if (std::isinf(eps_hat)) continue;
      inner = std::isinf(hat) ? weight * eps_hat
                              : weight * (1 - 1 / hat) * eps_hat +
                                    weight * log_inv_gamma / hat;
    }
    if (inner < best_inner) {
      best_inner = inner;
      best_hat = hat;
    }
  }
  if (std::isinf(best_inner)) return Bound{kInf, kMethodTnb, best_hat, lambda, ""};

  std::vector<double> outer = OuterOrders(lambda, kOuterGridPoints);
  if (!std::isinf(lambda) && base.kind() == CurveKind::kZCdp &&
      base.rho() > 0) {
    const double split = 1 + std::sqrt(log_mean / base.rho());
    if (split > lambda) outer.push_back(split);
  }
  std::sort(outer.begin(), outer.end());
  double best_outer = kInf;
  double best_order = lambda;
  for (double order : outer) {
    ASSIGN_OR_RETURN(const double eps, EvalCurve(base, order));
    if (std::isinf(eps)) continue;
    const double value =
        std::isinf(order) ? eps : eps + log_mean / (order - 1);
    if (value < best_outer) {
      best_outer = value;
      best_order = order;
    }
  }
  return Bound{best_outer + best_inner, kMethodTnb, best_hat, best_order, ""};
}

double BoundTnbPure(double epsilon, double eta) { return (2 + eta) * epsilon; }

absl::StatusOr<double> BoundTnbZCdp(double rho, double eta, double gamma,
                                    double lambda) {
  RETURN_IF_ERROR(CheckOrder(lambda));
  ASSIGN_OR_RETURN(const RepetitionDistribution dist,
                   RepetitionDistribution::TruncatedNegativeBinomial(eta, gamma));
  if (!(rho >= 0)) {
    return absl::InvalidArgumentError("rho must be >= 0");
  }
  const double log_inv_gamma = -std::log(gamma);
  if (rho > log_inv_gamma) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "closed form needs rho <= log(1/gamma); rho=%g, log(1/gamma)=%g", rho,
        log_inv_gamma));
  }
  if (std::isinf(lambda)) return rho == 0 ? 0.0 : kInf;
  const double log_mean = std::log(Mean(dist));
  const double shared =
      2 * (1 + eta) * std::sqrt(rho * log_inv_gamma) - eta * rho;
  if (rho == 0) return shared;
  const double split = 1 + std::sqrt(log_mean / rho);
  if (lambda <= split) return 2 * std::sqrt(rho * log_mean) + shared;
  return rho * (lambda - 1) + log_mean / (lambda - 1) + shared;
}

absl::StatusOr<double> BoundPoisson(double epsilon, double epsilon_hat,
                                    double delta_hat, double mu,
                                    double lambda) {
  RETURN_IF_ERROR(CheckOrder(lambda));
  if (!(mu > 0)) return absl::InvalidArgumentError("mu must be > 0");
  if (!(epsilon_hat >= 0) || !(delta_hat >= 0)) {
    return absl::InvalidArgumentError("epsilon_hat and delta_hat must be >= 0");
  }
  const double limit = std::isinf(lambda) ? 0.0 : std::log1p(1 / (lambda - 1));
  if (epsilon_hat > limit) {
    return absl::OutOfRangeError(absl::StrFormat(
        "order %g is inapplicable: needs exp(epsilon_hat) <= 1 + "
        "1/(lambda-1), i.e. epsilon_hat <= %.17g, got %.17g; lower lambda",
        lambda, limit, epsilon_hat));
  }
  const double log_term = std::isinf(lambda) ? 0.0 : std::log(mu) / (lambda - 1);
  return epsilon + mu * delta_hat + log_term;
}

absl::StatusOr<Bound> BoundPoissonCurve(const PrivacyCurve& base, double mu,
                                        double lambda) {
  RETURN_IF_ERROR(CheckOrder(lambda));
  RETURN_IF_ERROR(EvalCurve(base, lambda).status());
  Bound best{kInf, kMethodPoisson, kNaN, lambda, ""};
  std::vector<double> orders = OuterOrders(lambda, kPoissonOuterGridPoints);
  if (IsPureLike(base) && base.epsilon() > 0) {
    // Largest order at which epsilon_hat = epsilon and delta_hat = 0.
    const double pure_order = 1 + 1 / std::expm1(base.epsilon());
    if (pure_order > lambda) orders.push_back(pure_order);
  }
  for (double order : orders) {
    ASSIGN_OR_RETURN(const double eps, EvalCurve(base, order));
    if (std::isinf(eps)) continue;
    const double eps_hat =
        std::isinf(order) ? 0.0 : std::log1p(1 / (order - 1));
    ASSIGN_OR_RETURN(const double delta_hat, DeltaForEpsilon(base, eps_hat));
    ASSIGN_OR_RETURN(const double value,
                     BoundPoisson(eps, eps_hat, delta_hat, mu, order));
    if (value < best.epsilon) {
      best.epsilon = value;
      best.lambda_used = order;
      best.detail = absl::StrFormat("epsilon_hat=%.6g", eps_hat);
    }
  }
  return best;
}

absl::StatusOr<double> BoundPointMass(const PrivacyCurve& base, int64_t k,
                                      double lambda) {
  RETURN_IF_ERROR(CheckOrder(lambda));
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  ASSIGN_OR_RETURN(const double eps, EvalCurve(base, lambda));
  const double kd = static_cast<double>(k);
  if (std::isinf(lambda)) return kd * eps;
  return kd * eps + std::log(kd) / (lambda - 1);
}

double LowerBoundPointMass(double epsilon, int64_t k, double lambda) {
  const double kd = static_cast<double>(k);
  if (std::isinf(lambda)) return kd * epsilon;
  return kd * epsilon - kd * std::log1p(std::exp(-epsilon)) / (lambda - 1);
}

double BernoulliRenyiDivergence(double p, double q, double lambda) {
  if (p == q) return 0;
  const std::array<double, 2> ps = {p, 1 - p};
  const std::array<double, 2> qs = {q, 1 - q};
  if (lambda == 1) {
    double kl = 0;
    for (int i = 0; i < 2; ++i) {
      if (ps[i] <= 0) continue;
      if (qs[i] <= 0) return kInf;
      kl += ps[i] * std::log(ps[i] / qs[i]);
    }
    return std::max(0.0, kl);
  }
  if (std::isinf(lambda)) {
    double worst = 0;
    for (int i = 0; i < 2; ++i) {
      if (ps[i] <= 0) continue;
      if (qs[i] <= 0) return kInf;
      worst = std::max(worst, std::log(ps[i] / qs[i]));
    }
    return worst;
  }
  std::array<double, 2> terms;
  int n = 0;
  for (int i = 0; i < 2; ++i) {
    if (ps[i] <= 0) continue;
    if (qs[i] <= 0) return kInf;
    terms[n++] = lambda * std::log(ps[i]) + (1 - lambda) * std::log(qs[i]);
  }
  return std::max(0.0, LogSumExp(std::span<const double>(terms.data(), n)) /
                           (lambda - 1));
}

absl::StatusOr<Bound> GenericBound(const RepetitionDistribution& dist,
                                   const PrivacyCurve& base, double lambda,
                                   std::span<const double> constraint_orders) {
  RETURN_IF_ERROR(CheckOrder(lambda));
  ASSIGN_OR_RETURN(const double eps, EvalCurve(base, lambda));
  std::vector<Constraint> constraints;
  for (double order : constraint_orders) {
    RETURN_IF_ERROR(CheckOrder(order));
    ASSIGN_OR_RETURN(const double eps_hat, EvalCurve(base, order));
    if (std::isfinite(eps_hat)) constraints.push_back({order, eps_hat});
  }
  Bound bound{kInf, kMethodGeneric, kNaN, lambda, ""};
  if (std::isinf(eps)) return bound;
  const GenericPenalty penalty(dist, lambda, constraints);

  const int n = kGenericGridPoints;
  std::vector<double> values(n);
  int best = 0;
  for (int i = 0; i < n; ++i) {
    values[i] = penalty(static_cast<double>(i) / (n - 1));
    if (values[i] > values[best]) best = i;
  }
  if (values[best] == kInf) return bound;
  const double lo = static_cast<double>(std::max(best - 1, 0)) / (n - 1);
  const double hi = static_cast<double>(std::min(best + 1, n - 1)) / (n - 1);
  MinimizeResult refined = GoldenSectionMinimize(
      [&penalty](double q) { return -penalty(q); }, lo, hi, kRefineTolerance);
  double q_star = refined.x;
  double p_star = -refined.value;
  if (values[best] > p_star) {
    q_star = static_cast<double>(best) / (n - 1);
    p_star = values[best];
  }
  // Lipschitz margin over one refined cell around the incumbent.
  double margin = 0;
  for (double step : {-kMarginStep, kMarginStep}) {
    const double q = q_star + step;
    if (q < 0 || q > 1) continue;
    const double v = penalty(q);
    if (std::isfinite(v)) margin = std::max(margin, std::abs(v - p_star));
  }
  const double total = p_star + margin;
  bound.epsilon =
      std::isinf(lambda) ? eps + total : eps + total / (lambda - 1);
  if (!constraints.empty()) {
    size_t binding = 0;
    penalty.Partner(q_star, &binding);
    bound.lambda_hat = constraints[binding].order;
  }
  bound.detail = absl::StrFormat("q=%.6g", q_star);
  return bound;
}

absl::StatusOr<Bound> GenericBound(const RepetitionDistribution& dist,
                                   const PrivacyCurve& base, double lambda,
                                   double lambda_hat) {
  const std::array<double, 1> orders = {lambda_hat};
  return GenericBound(dist, base, lambda, orders);
}

absl::StatusOr<double> TruncationPenalty(const RepetitionDistribution& dist,
                                         int64_t limit, double lambda) {
  RETURN_IF_ERROR(CheckOrder(lambda));
  if (limit < 1) return absl::InvalidArgumentError("limit must be >= 1");
  ASSIGN_OR_RETURN(const TruncationStats stats,
                   ComputeTruncationStats(dist, limit));
  const double mean = Mean(dist);
  if (!(stats.tail_mean < mean) || !(stats.tail_probability < 1)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "truncating %s at %d leaves no mass to analyze", dist.ToString(),
        limit));
  }
  const double mass_term =
      std::isinf(lambda) ? 0.0
                         : -std::log1p(-stats.tail_probability) / (lambda - 1);
  const double mean_term =
      std::log1p(stats.tail_mean / (mean - stats.tail_mean));
  return mass_term + mean_term;
}

absl::StatusOr<Bound> TruncatedBound(
    const RepetitionDistribution& dist, int64_t limit,
    const PrivacyCurve& base, double lambda,
    std::span<const double> constraint_orders) {
  ASSIGN_OR_RETURN(const double extra, TruncationPenalty(dist, limit, lambda));
  ASSIGN_OR_RETURN(Bound bound,
                   GenericBound(dist, base, lambda, constraint_orders));
  bound.epsilon += extra;
  bound.method = kMethodTruncated;
  return bound;
}

absl::StatusOr<Bound> TruncatedBound(const RepetitionDistribution& dist,
                                     int64_t limit, const PrivacyCurve& base,
                                     double lambda, double lambda_hat) {
  const std::array<double, 1> orders = {lambda_hat};
  return TruncatedBound(dist, limit, base, lambda, orders);
}

ConditionalSpec ConditionalSpec::Holder(double p, double q, double r) {
  ConditionalSpec s;
  s.kind = Kind::kHolder;
  auto inv = [](double x) { return std::isinf(x) ? 0.0 : 1 / x; };
  s.holder = {inv(p), inv(q), inv(r)};
  return s;
}

absl::StatusOr<Bound> ConditionalBound(const DivergenceFunction& forward,
                                       const DivergenceFunction& backward,
                                       double qs_lower, double lambda,
                                       const ConditionalSpec& spec) {
  RETURN_IF_ERROR(CheckOrder(lambda));
  if (!(qs_lower > 0 && qs_lower <= 1)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "lower bound on Q(S) must be in (0, 1], got %g", qs_lower));
  }
  switch (spec.kind) {
    case ConditionalSpec::Kind::kPreset:
      return PresetBound(forward, backward, qs_lower, lambda, spec.preset,
                         spec.r);
    case ConditionalSpec::Kind::kHolder: {
      ASSIGN_OR_RETURN(const double value,
                       HolderValue(forward, backward, qs_lower, lambda,
                                   spec.holder));
      return Bound{value, kMethodConditional, kNaN, lambda,
                   HolderDetail(spec.holder)};
    }
    case ConditionalSpec::Kind::kAuto:
      break;
  }
  // Presets first, then a grid over the simplex of reciprocal exponents.
  ASSIGN_OR_RETURN(Bound best,
                   PresetBound(forward, backward, qs_lower, lambda, 1, 2));
  if (std::isinf(lambda)) return best;
  for (int preset = 2; preset <= 5; ++preset) {
    const std::vector<double> rs =
        preset == 5 ? std::vector<double>{1.25, 1.5, 2, 3, 4, 8}
                    : std::vector<double>{2};
    for (double r : rs) {
      auto candidate =
          PresetBound(forward, backward, qs_lower, lambda, preset, r);
      if (candidate.ok() && candidate->epsilon < best.epsilon) {
        best = *std::move(candidate);
      }
    }
  }
  constexpr int kSteps = 20;
  for (int i = 0; i <= kSteps; ++i) {
    for (int j = 0; i + j <= kSteps; ++j) {
      const HolderExponents h{static_cast<double>(i) / kSteps,
                              static_cast<double>(j) / kSteps,
                              static_cast<double>(kSteps - i - j) / kSteps};
      auto value = HolderValue(forward, backward, qs_lower, lambda, h);
      if (value.ok() && *value < best.epsilon) {
        best = Bound{*value, kMethodConditional, kNaN, lambda,
                     HolderDetail(h)};
      }
    }
  }
  return best;
}

absl::StatusOr<Bound> ConditionalBound(const PrivacyCurve& forward,
                                       const PrivacyCurve& backward,
                                       double qs_lower, double lambda,
                                       const ConditionalSpec& spec) {
  for (const PrivacyCurve* c : {&forward, &backward}) {
    if (c->failure_mass() > 0) {
      return absl::UnimplementedError(absl::StrFormat(
          "conditional bound needs Renyi curves without failure mass; got %s",
          c->ToString()));
    }
  }
  auto eval = [](const PrivacyCurve& curve) {
    return [&curve](double order) {
      auto v = EvalCurve(curve, order);
      return v.ok() ? *v : kInf;
    };
  };
  return ConditionalBound(eval(forward), eval(backward), qs_lower, lambda,
                          spec);
}

ApproxPoissonResult ApproxPoisson(double epsilon0, double delta0, double mu) {
  ApproxPoissonResult out;
  out.lambda_max = epsilon0 == 0 ? kInf : 1 + 1 / std::expm1(epsilon0);
  // exp(epsilon_hat) = 1 + 1/(lambda-1) exactly at lambda_max, so Poisson
  // repetition applies with epsilon_hat = epsilon0 and delta_hat = 0.
  auto eps = BoundPoisson(epsilon0, 0, 0, mu, out.lambda_max);
  out.epsilon = eps.ok() ? *eps : kInf;
  out.delta = -std::expm1(-mu * delta0);
  return out;
}

absl::StatusOr<PrivacyCurve> TuningBound::AsCurve() const {
  std::vector<RdpPoint> table;
  table.reserve(points.size());
  for (const BoundPoint& p : points) table.push_back({p.lambda, p.epsilon});
  return PrivacyCurve::RdpTable(std::move(table), delta);
}

absl::StatusOr<double> TuningBound::EpsilonAt(double lambda) const {
  for (const BoundPoint& p : points) {
    if (p.lambda >= lambda) return p.epsilon;
  }
  return kInf;
}

absl::StatusOr<TuningBound> Analyze(const RepetitionDistribution& dist,
                                    const PrivacyCurve& base,
                                    const AnalyzeOptions& options) {
  if (base.failure_mass() > 0) return ApproxRepetition(base, dist, options);
  ASSIGN_OR_RETURN(TuningBound out, AnalyzeExact(dist, base, options.lambdas));
  if (options.target_delta.has_value()) {
    ASSIGN_OR_RETURN(const PrivacyCurve curve, out.AsCurve());
    ASSIGN_OR_RETURN(out.approx_dp, RdpToApproxDp(curve, *options.target_delta));
  }
  return out;
}

absl::StatusOr<TuningBound> ApproxRepetition(const PrivacyCurve& base,
                                             const RepetitionDistribution& dist,
                                             const AnalyzeOptions& options) {
  const double delta0 = base.failure_mass();
  if (!(delta0 < 1)) {
    return absl::InvalidArgumentError("failure mass must be < 1");
  }
  const double survival = 1 - delta0;
  ASSIGN_OR_RETURN(const RepetitionDistribution reweighted,
                   ReweightBySurvival(dist, survival));
  ASSIGN_OR_RETURN(TuningBound out,
                   AnalyzeExact(reweighted, base.WithoutFailureMass(),
                                options.lambdas));
  out.base = base;
  out.executed_distribution = dist;
  out.delta = delta0 == 0 ? 0.0 : std::clamp(1 - PgfUnit(dist, survival), 0.0, 1.0);
  if (options.target_delta.has_value()) {
    ASSIGN_OR_RETURN(const PrivacyCurve curve, out.AsCurve());
    ASSIGN_OR_RETURN(out.approx_dp, RdpToApproxDp(curve, *options.target_delta));
  }
  return out;
}

std::string TuningBoundCsv(const TuningBound& bound) {
  std::string out = "lambda,epsilon_prime,method,lambda_hat\n";
  for (const BoundPoint& p : bound.points) {
    absl::StrAppend(&out, FormatOrder(p.lambda), ",", FormatOrder(p.epsilon),
                    ",", p.method, ",",
                    std::isnan(p.lambda_hat) ? "" : FormatOrder(p.lambda_hat),
                    "\n");
  }
  return out;
}

}  // namespace repdp
