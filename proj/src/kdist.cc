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

#include "repdp/kdist.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "repdp/numeric.h"
#include "repdp/status_macros.h"

namespace repdp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int64_t kMaxSeriesTerms = 200'000'000;

bool LogBranch(double eta) { return std::abs(eta) < kLogarithmicBranchEta; }

// log of the truncated negative binomial PMF at k >= 1.
double TnbLogPmf(double eta, double gamma, int64_t k) {
  const double kd = static_cast<double>(k);
  const double log_decay = kd * std::log1p(-gamma);
  if (LogBranch(eta)) {
    return log_decay - std::log(kd) - std::log(-std::log(gamma));
  }
  // prod_{l<k} (l+eta)/(l+1) = Gamma(k+eta) / (Gamma(eta) k!). For eta < 0
  // both the product and gamma^-eta - 1 are negative.
  return log_decay + std::lgamma(kd + eta) - std::lgamma(kd + 1) -
         std::lgamma(eta) - std::log(std::abs(std::expm1(-eta * std::log(gamma))));
}

double TnbMean(double eta, double gamma) {
  if (LogBranch(eta)) return (1.0 / gamma - 1.0) / -std::log(gamma);
  return eta * (1.0 - gamma) / (gamma * -std::expm1(eta * std::log(gamma)));
}

double PoissonLogPmf(double mu, int64_t k) {
  const double kd = static_cast<double>(k);
  return kd * std::log(mu) - mu - std::lgamma(kd + 1);
}

double Horner(std::span<const double> coefficients, double x) {
  double acc = 0;
  for (size_t i = coefficients.size(); i-- > 0;) acc = acc * x + coefficients[i];
  return acc;
}

// f'(x) of a polynomial PGF with coefficients p_0..p_m.
double HornerDerivative(std::span<const double> coefficients, double x) {
  double acc = 0;
  for (size_t i = coefficients.size(); i-- > 1;) {
    acc = acc * x + static_cast<double>(i) * coefficients[i];
  }
  return acc;
}

absl::Status CheckPgfArgument(const RepetitionDistribution& dist, double x) {
  if (!(x >= 0) || !(x < PgfDomainUpper(dist))) {
    return absl::OutOfRangeError(absl::StrFormat(
        "pgf argument %g outside the domain [0, %g) of %s", x,
        PgfDomainUpper(dist), dist.ToString()));
  }
  return absl::OkStatus();
}

// log f(e^t); +inf outside the domain.
double LogPgfAtExp(const RepetitionDistribution& dist, double t) {
  switch (dist.family()) {
    case Family::kPointMass:
      return static_cast<double>(dist.point()) * t;
    case Family::kPoisson:
      return dist.mu() * std::expm1(t);
    case Family::kTruncatedNegativeBinomial: {
      const double gamma = dist.gamma();
      const double base = 1.0 - (1.0 - gamma) * std::exp(t);
      if (!(base > 0)) return kInf;
      if (LogBranch(dist.eta())) {
        return std::log(std::log(base) / std::log(gamma));
      }
      const double eta = dist.eta();
      return std::log(std::expm1(-eta * std::log(base)) /
                      std::expm1(-eta * std::log(gamma)));
    }
    case Family::kTruncated: {
      std::vector<double> terms;
      const auto pmf = dist.truncated_pmf();
      terms.reserve(pmf.size());
      for (size_t k = 0; k < pmf.size(); ++k) {
        if (pmf[k] > 0) terms.push_back(std::log(pmf[k]) + t * k);
      }
      return LogSumExp(terms);
    }
  }
  return kInf;
}

// Draw ignoring any table; exact for every family.
int64_t SampleLogarithmic(double gamma, Rng& rng) {
  // K | q is geometric with success 1-q where q = 1 - gamma^U.
  const double q = -std::expm1(std::log(gamma) * rng.Uniform01());
  const double v = rng.Uniform01();
  if (v > q) return 1;
  const double k = 1.0 + std::floor(std::log(v) / std::log(q));
  return k >= 9.2e18 ? std::numeric_limits<int64_t>::max()
                     : static_cast<int64_t>(k);
}

int64_t SampleDirect(const RepetitionDistribution& dist, Rng& rng) {
  switch (dist.family()) {
    case Family::kPointMass:
      return dist.point();
    case Family::kPoisson:
      return std::poisson_distribution<int64_t>(dist.mu())(rng.engine());
    case Family::kTruncatedNegativeBinomial: {
      const double eta = dist.eta();
      const double gamma = dist.gamma();
      if (LogBranch(eta)) return SampleLogarithmic(gamma, rng);
      if (eta > 0) {
        // Gamma-Poisson mixture of the negative binomial, conditioned on K > 0.
        std::gamma_distribution<double> rate(eta, (1.0 - gamma) / gamma);
        while (true) {
          const double lambda = rate(rng.engine());
          if (!(lambda > 0)) continue;
          const int64_t k =
              std::poisson_distribution<int64_t>(lambda)(rng.engine());
          if (k > 0) return k;
        }
      }
      // eta in (-1, 0): thin the logarithmic law by
      // Gamma(k+eta) / (Gamma(k) Gamma(1+eta)), which is 1 at k = 1 and
      // decreasing.
      const double log_norm = std::lgamma(1.0 + eta);
      while (true) {
        const int64_t k = SampleLogarithmic(gamma, rng);
        const double kd = static_cast<double>(k);
        const double log_accept =
            std::lgamma(kd + eta) - std::lgamma(kd) - log_norm;
        if (std::log(rng.Uniform01()) < log_accept) return k;
      }
    }
    case Family::kTruncated:
      while (true) {
        const int64_t k = SampleDirect(dist.inner(), rng);
        if (k <= dist.limit()) return k;
      }
  }
  return 0;
}

}  // namespace

absl::StatusOr<RepetitionDistribution> RepetitionDistribution::PointMass(
    int64_t k) {
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("point mass requires k >= 1, got %d", k));
  }
  RepetitionDistribution d;
  d.family_ = Family::kPointMass;
  d.count_ = k;
  return d;
}

absl::StatusOr<RepetitionDistribution>
RepetitionDistribution::TruncatedNegativeBinomial(double eta, double gamma) {
  if (!(eta > -1) || !std::isfinite(eta)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("truncated negative binomial requires eta in (-1, inf), "
                        "got %g",
                        eta));
  }
  if (!(gamma > 0 && gamma < 1)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "truncated negative binomial requires gamma in (0, 1), got %g", gamma));
  }
  RepetitionDistribution d;
  d.family_ = Family::kTruncatedNegativeBinomial;
  d.first_ = eta;
  d.second_ = gamma;
  d.count_ = 0;
  return d;
}

absl::StatusOr<RepetitionDistribution> RepetitionDistribution::Geometric(
    double gamma) {
  return TruncatedNegativeBinomial(1.0, gamma);
}

absl::StatusOr<RepetitionDistribution> RepetitionDistribution::Logarithmic(
    double gamma) {
  return TruncatedNegativeBinomial(0.0, gamma);
}

absl::StatusOr<RepetitionDistribution> RepetitionDistribution::Poisson(
    double mu) {
  if (!(mu > 0) || !std::isfinite(mu)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("poisson requires mu > 0, got %g", mu));
  }
  RepetitionDistribution d;
  d.family_ = Family::kPoisson;
  d.first_ = mu;
  d.count_ = 0;
  return d;
}

absl::StatusOr<RepetitionDistribution> RepetitionDistribution::Truncated(
    const RepetitionDistribution& inner, int64_t limit) {
  if (limit < 1 || limit > kMaxTruncationLimit) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "truncation limit must be in [1, %d], got %d", kMaxTruncationLimit,
        limit));
  }
  std::vector<double> table(limit + 1);
  double mass = 0;
  for (int64_t k = 0; k <= limit; ++k) {
    table[k] = Pmf(inner, k);
    mass += table[k];
  }
  if (!(mass > 0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%s has no mass at or below %d", inner.ToString(), limit));
  }
  for (double& p : table) p /= mass;
  RepetitionDistribution d;
  d.family_ = Family::kTruncated;
  d.count_ = limit;
  d.inner_mass_ = std::min(1.0, mass);
  d.inner_ = std::make_shared<const RepetitionDistribution>(inner);
  d.table_ = std::make_shared<const std::vector<double>>(std::move(table));
  return d;
}

bool RepetitionDistribution::is_logarithmic() const {
  return family_ == Family::kTruncatedNegativeBinomial && LogBranch(first_);
}

std::string RepetitionDistribution::ToString() const {
  switch (family_) {
    case Family::kPointMass:
      return absl::StrFormat("point(k=%d)", count_);
    case Family::kTruncatedNegativeBinomial:
      return absl::StrFormat("tnb(eta=%g,gamma=%g)", first_, second_);
    case Family::kPoisson:
      return absl::StrFormat("poisson(mu=%g)", first_);
    case Family::kTruncated:
      return absl::StrFormat("truncated(%s,limit=%d)", inner_->ToString(),
                             count_);
  }
  return "unknown";
}

bool operator==(const RepetitionDistribution& a,
                const RepetitionDistribution& b) {
  if (a.family_ != b.family_) return false;
  switch (a.family_) {
    case Family::kPointMass:
      return a.count_ == b.count_;
    case Family::kTruncatedNegativeBinomial:
      return a.first_ == b.first_ && a.second_ == b.second_;
    case Family::kPoisson:
      return a.first_ == b.first_;
    case Family::kTruncated:
      return a.count_ == b.count_ && *a.inner_ == *b.inner_;
  }
  return false;
}

double Pmf(const RepetitionDistribution& dist, int64_t k) {
  if (k < 0) return 0;
  switch (dist.family()) {
    case Family::kPointMass:
      return k == dist.point() ? 1.0 : 0.0;
    case Family::kTruncatedNegativeBinomial:
      if (k == 0) return 0;
      return std::exp(TnbLogPmf(dist.eta(), dist.gamma(), k));
    case Family::kPoisson:
      return std::exp(PoissonLogPmf(dist.mu(), k));
    case Family::kTruncated:
      return k <= dist.limit() ? dist.truncated_pmf()[k] : 0.0;
  }
  return 0;
}

double Mean(const RepetitionDistribution& dist) {
  switch (dist.family()) {
    case Family::kPointMass:
      return static_cast<double>(dist.point());
    case Family::kTruncatedNegativeBinomial:
      return TnbMean(dist.eta(), dist.gamma());
    case Family::kPoisson:
      return dist.mu();
    case Family::kTruncated: {
      double mean = 0;
      const auto pmf = dist.truncated_pmf();
      for (size_t k = 1; k < pmf.size(); ++k) mean += k * pmf[k];
      return mean;
    }
  }
  return 0;
}

double ProbabilityOfZero(const RepetitionDistribution& dist) {
  return Pmf(dist, 0);
}

double PgfDomainUpper(const RepetitionDistribution& dist) {
  if (dist.family() == Family::kTruncatedNegativeBinomial) {
    return 1.0 / (1.0 - dist.gamma());
  }
  return kInf;
}

double PgfUnit(const RepetitionDistribution& dist, double x) {
  switch (dist.family()) {
    case Family::kPointMass:
      return std::pow(x, static_cast<double>(dist.point()));
    case Family::kPoisson:
      return std::exp(dist.mu() * (x - 1.0));
    case Family::kTruncatedNegativeBinomial: {
      const double gamma = dist.gamma();
      const double log_base = std::log1p(-(1.0 - gamma) * x);
      if (LogBranch(dist.eta())) return log_base / std::log(gamma);
      const double eta = dist.eta();
      return std::expm1(-eta * log_base) / std::expm1(-eta * std::log(gamma));
    }
    case Family::kTruncated:
      return Horner(dist.truncated_pmf(), x);
  }
  return 0;
}

double LogPgfDerivativeUnit(const RepetitionDistribution& dist, double x) {
  switch (dist.family()) {
    case Family::kPointMass: {
      const double k = static_cast<double>(dist.point());
      if (dist.point() == 1) return 0.0;
      return std::log(k) + (k - 1.0) * std::log(x);
    }
    case Family::kPoisson:
      return std::log(dist.mu()) + dist.mu() * (x - 1.0);
    case Family::kTruncatedNegativeBinomial: {
      // f'(x) = (1 - (1-gamma) x)^(-eta-1) gamma^(eta+1) E[K].
      const double gamma = dist.gamma();
      const double eta = LogBranch(dist.eta()) ? 0.0 : dist.eta();
      return -(eta + 1.0) * std::log1p(-(1.0 - gamma) * x) +
             (eta + 1.0) * std::log(gamma) + std::log(Mean(dist));
    }
    case Family::kTruncated: {
      const double d = HornerDerivative(dist.truncated_pmf(), x);
      return d > 0 ? std::log(d) : -kInf;
    }
  }
  return -kInf;
}

absl::StatusOr<double> Pgf(const RepetitionDistribution& dist, double x) {
  RETURN_IF_ERROR(CheckPgfArgument(dist, x));
  return PgfUnit(dist, x);
}

absl::StatusOr<double> PgfDerivative(const RepetitionDistribution& dist,
                                     double x) {
  RETURN_IF_ERROR(CheckPgfArgument(dist, x));
  if (dist.family() == Family::kTruncated) {
    return HornerDerivative(dist.truncated_pmf(), x);
  }
  if (dist.family() == Family::kPointMass) {
    const double k = static_cast<double>(dist.point());
    return k * std::pow(x, k - 1.0);
  }
  return std::exp(LogPgfDerivativeUnit(dist, x));
}

absl::StatusOr<int64_t> SeriesLimit(const RepetitionDistribution& dist,
                                    double residual) {
  switch (dist.family()) {
    case Family::kPointMass:
      return dist.point();
    case Family::kTruncated: {
      const auto pmf = dist.truncated_pmf();
      double tail = 0;
      for (int64_t k = static_cast<int64_t>(pmf.size()) - 1; k >= 0; --k) {
        tail += pmf[k];
        if (tail >= residual) return k;
      }
      return 0;
    }
    case Family::kPoisson:
    case Family::kTruncatedNegativeBinomial:
      break;
  }
  // Kahan-summed CDF so that long series still resolve a 1e-12 residual.
  double sum = 0;
  double compensation = 0;
  for (int64_t k = 0; k < kMaxSeriesTerms; ++k) {
    const double y = Pmf(dist, k) - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
    if (1.0 - sum < residual && k >= Mean(dist)) return k;
  }
  return absl::ResourceExhaustedError(absl::StrFormat(
      "series for %s needs more than %d terms to reach residual %g",
      dist.ToString(), kMaxSeriesTerms, residual));
}

absl::StatusOr<double> TailBound(const RepetitionDistribution& dist,
                                 int64_t k) {
  if (k < 1) return 1.0;
  double t_max = 40.0;
  if (dist.family() == Family::kTruncatedNegativeBinomial) {
    // f(e^t) has a pole at e^t = 1/(1-gamma); stay just inside it.
    t_max = -std::log1p(-dist.gamma()) * (1 - 1e-6);
    if (!(t_max > 0)) {
      return absl::UnimplementedError(absl::StrFormat(
          "PGF of %s is not finite above 1", dist.ToString()));
    }
  }
  const double kd = static_cast<double>(k);
  auto objective = [&](double t) { return LogPgfAtExp(dist, t) - t * kd; };
  const MinimizeResult best =
      GoldenSectionMinimize(objective, 1e-12, t_max, 1e-10);
  return std::min(1.0, std::exp(best.value));
}

absl::StatusOr<TruncationStats> ComputeTruncationStats(
    const RepetitionDistribution& dist, int64_t limit) {
  if (limit < 0) {
    return absl::InvalidArgumentError("truncation limit must be >= 0");
  }
  TruncationStats stats;
  switch (dist.family()) {
    case Family::kPointMass:
    case Family::kTruncated: {
      const int64_t top = dist.family() == Family::kPointMass
                              ? dist.point()
                              : dist.limit();
      for (int64_t k = limit + 1; k <= top; ++k) {
        const double p = Pmf(dist, k);
        stats.tail_probability += p;
        stats.tail_mean += k * p;
      }
      return stats;
    }
    case Family::kPoisson:
    case Family::kTruncatedNegativeBinomial:
      break;
  }
  // Sum the tail directly so that small tails keep their relative accuracy.
  const double mean = Mean(dist);
  double previous = Pmf(dist, limit);
  for (int64_t k = limit + 1; k < limit + kMaxSeriesTerms; ++k) {
    const double p = Pmf(dist, k);
    stats.tail_probability += p;
    stats.tail_mean += k * p;
    const bool decreasing = k > mean && p <= previous;
    if (p == 0 || (decreasing && k * p < 1e-18 * stats.tail_mean)) break;
    previous = p;
  }
  stats.tail_probability = std::clamp(stats.tail_probability, 0.0, 1.0);
  return stats;
}

absl::StatusOr<RepetitionDistribution> ReweightBySurvival(
    const RepetitionDistribution& dist, double survival) {
  if (!(survival > 0 && survival <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("survival probability must be in (0, 1], got %g",
                        survival));
  }
  if (survival == 1) return dist;
  switch (dist.family()) {
    case Family::kPointMass:
      return dist;
    case Family::kPoisson:
      return RepetitionDistribution::Poisson(dist.mu() * survival);
    case Family::kTruncatedNegativeBinomial:
      // (1 - (1-gamma) s x) has the same form with 1-gamma' = (1-gamma) s.
      return RepetitionDistribution::TruncatedNegativeBinomial(
          dist.eta(), 1.0 - (1.0 - dist.gamma()) * survival);
    case Family::kTruncated: {
      ASSIGN_OR_RETURN(RepetitionDistribution inner,
                       ReweightBySurvival(dist.inner(), survival));
      return RepetitionDistribution::Truncated(inner, dist.limit());
    }
  }
  return absl::InternalError("unknown family");
}

absl::StatusOr<double> TnbGammaForMean(double eta, double mean) {
  if (!(mean > 1) || !std::isfinite(mean)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("target mean must exceed 1, got %g", mean));
  }
  if (!(eta > -1)) {
    return absl::InvalidArgumentError("eta must exceed -1");
  }
  // The mean is decreasing in gamma; bisect on log(1/gamma) in log space.
  double lo = std::log(1e-12);  // log(log(1/gamma)), gamma close to 1
  double hi = std::log(700.0);  // gamma = e^-700
  auto mean_at = [eta](double s) {
    const double gamma = std::exp(-std::exp(s));
    return TnbMean(eta, gamma);
  };
  if (mean_at(hi) < mean) {
    return absl::OutOfRangeError(
        absl::StrFormat("mean %g is not reachable for eta=%g", mean, eta));
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mean_at(mid) < mean) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(-std::exp(0.5 * (lo + hi)));
}

RepetitionSampler::RepetitionSampler(RepetitionDistribution dist)
    : dist_(std::move(dist)) {}

void RepetitionSampler::ExtendTo(double u) {
  while (!complete_ && (cdf_.empty() || cdf_.back() < u) &&
         static_cast<int64_t>(cdf_.size()) < kTableCap) {
    const int64_t k = static_cast<int64_t>(cdf_.size());
    const double previous = cdf_.empty() ? 0.0 : cdf_.back();
    const double y = Pmf(dist_, k) - compensation_;
    const double t = previous + y;
    compensation_ = (t - previous) - y;
    cdf_.push_back(t);
    const bool finite_support =
        (dist_.family() == Family::kPointMass && k >= dist_.point()) ||
        (dist_.family() == Family::kTruncated && k >= dist_.limit());
    if (finite_support || 1.0 - t < kSeriesResidual) complete_ = true;
  }
}

int64_t RepetitionSampler::Sample(Rng& rng) {
  if (dist_.family() == Family::kPointMass) return dist_.point();
  const double u = rng.Uniform01();
  ExtendTo(u);
  if (u <= cdf_.back()) {
    return std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
  }
  if (complete_) return static_cast<int64_t>(cdf_.size()) - 1;
  // The table stopped at its cap with mass left above it: draw exactly from
  // K | K > cap.
  const int64_t floor = static_cast<int64_t>(cdf_.size()) - 1;
  while (true) {
    const int64_t k = SampleDirect(dist_, rng);
    if (k > floor) return k;
  }
}

int64_t Sample(const RepetitionDistribution& dist, Rng& rng) {
  RepetitionSampler sampler(dist);
  return sampler.Sample(rng);
}

}  // namespace repdp
