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

#include "repdp/oracle.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "repdp/numeric.h"
#include "repdp/rng.h"
#include "repdp/status_macros.h"

namespace repdp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassTolerance = 1e-12;

// Above this relative width the plain difference f(hi) - f(lo) is accurate;
// below it the increment is integrated from f'.

// Best-of-K draws are simulated one by one up to this K; beyond it the
// maximum is drawn from its exact law.
constexpr int64_t kLoopLimit = 64;
constexpr int kMonteCarloShards = 64;

constexpr double kBoxLo = 1e-6;
constexpr double kBoxHi = 50;
constexpr double kSolveTolerance = 1e-10;

// (lo + width)^k - lo^k without forming the difference.
double PowerIncrement(double lo, double width, double k) {
  if (lo <= 0) return std::pow(width, k);
  return std::pow(lo, k) * std::expm1(k * std::log1p(width / lo));
}

// f(lo + width) - f(lo). gap_lo = 1 - lo is passed in so that nothing near
// x = 1 is computed by cancellation.
double PgfIncrement(const RepetitionDistribution& dist, double lo,
                    double width, double gap_lo) {
  if (width <= 0) return 0;
  switch (dist.family()) {
    case Family::kPointMass:
      return PowerIncrement(lo, width, static_cast<double>(dist.point()));
    case Family::kPoisson:
      return std::exp(-dist.mu() * gap_lo) * std::expm1(dist.mu() * width);
    case Family::kTruncatedNegativeBinomial: {
      const double gamma = dist.gamma();
      // u = 1 - (1-gamma)(lo+width), v = 1 - (1-gamma) lo.
      const double v = gamma + (1 - gamma) * gap_lo;
      const double log_ratio = std::log1p(-(1 - gamma) * width / v);
      if (dist.is_logarithmic()) return log_ratio / std::log(gamma);
      const double eta = dist.eta();
      return std::pow(v, -eta) * std::expm1(-eta * log_ratio) /
             std::expm1(-eta * std::log(gamma));
    }
    case Family::kTruncated: {
      const auto pmf = dist.truncated_pmf();
      double total = 0;
      for (size_t k = 1; k < pmf.size(); ++k) {
        total += pmf[k] * PowerIncrement(lo, width, static_cast<double>(k));
      }
      return total;
    }
  }
  return 0;
}

// Suffix sums Q(<= y_i), i.e. the mass of outcomes no better than i.
std::vector<double> SuffixMass(std::span<const double> q) {
  std::vector<double> s(q.size() + 1, 0.0);
  for (size_t i = q.size(); i-- > 0;) s[i] = s[i + 1] + q[i];
  s[0] = 1;
  for (double& v : s) v = std::min(v, 1.0);
  return s;
}

std::array<double, 2> Figure8Residual(double lambda, double rate, double a,
                                      double s, double t) {
  auto instance = WorstCaseConditional(s, t, a);
  if (!instance.ok()) return {kInf, kInf};
  const FiniteMechanismPair& pair = instance->pair;
  return {RenyiDivergence(pair.p(), pair.p_prime(), lambda) - rate,
          RenyiDivergence(pair.p_prime(), pair.p(), lambda) - rate};
}

double Norm(const std::array<double, 2>& v) {
  return std::max(std::abs(v[0]), std::abs(v[1]));
}

// Damped Newton with a finite-difference Jacobian, kept inside the box.
bool NewtonSolve(double lambda, double rate, double a, double& s, double& t) {
  auto residual = [&](double x, double y) {
    return Figure8Residual(lambda, rate, a, x, y);
  };
  std::array<double, 2> f = residual(s, t);
  for (int iter = 0; iter < 100 && Norm(f) >= kSolveTolerance; ++iter) {
    const double hs = 1e-7 * std::max(1.0, s);
    const double ht = 1e-7 * std::max(1.0, t);
    const auto fs_hi = residual(s + hs, t);
    const auto fs_lo = residual(std::max(s - hs, kBoxLo / 2), t);
    const auto ft_hi = residual(s, t + ht);
    const auto ft_lo = residual(s, std::max(t - ht, kBoxLo / 2));
    const double ds = s + hs - std::max(s - hs, kBoxLo / 2);
    const double dt = t + ht - std::max(t - ht, kBoxLo / 2);
    const double j00 = (fs_hi[0] - fs_lo[0]) / ds;
    const double j10 = (fs_hi[1] - fs_lo[1]) / ds;
    const double j01 = (ft_hi[0] - ft_lo[0]) / dt;
    const double j11 = (ft_hi[1] - ft_lo[1]) / dt;
    const double det = j00 * j11 - j01 * j10;
    if (!std::isfinite(det) || det == 0) return false;
    const double step_s = (j11 * f[0] - j01 * f[1]) / det;
    const double step_t = (j00 * f[1] - j10 * f[0]) / det;
    bool improved = false;
    for (double damping = 1; damping > 1e-6; damping /= 2) {
      const double ns = std::clamp(s - damping * step_s, kBoxLo, kBoxHi);
      const double nt = std::clamp(t - damping * step_t, kBoxLo, kBoxHi);
      const auto nf = residual(ns, nt);
      if (Norm(nf) < Norm(f)) {
        s = ns;
        t = nt;
        f = nf;
        improved = true;
        break;
      }
    }
    if (!improved) return false;
  }
  return Norm(f) < kSolveTolerance;
}

// Root of a monotone-in-sign function on [lo, hi] by bisection; nullopt if
// the endpoints do not bracket a sign change.
std::optional<double> BisectRoot(const std::function<double(double)>& g,
                                 double lo, double hi) {
  double glo = g(lo);
  const double ghi = g(hi);
  if (!(glo * ghi <= 0)) return std::nullopt;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if ((gm <= 0) == (glo <= 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Nested bisection: t(s) solves the forward equation, then s solves the
// backward one.
bool BisectionSolve(double lambda, double rate, double a, double& s,
                    double& t) {
  auto t_of_s = [&](double x) {
    return BisectRoot(
        [&](double y) { return Figure8Residual(lambda, rate, a, x, y)[0]; },
        kBoxLo, kBoxHi);
  };
  auto outer = [&](double x) {
    const auto y = t_of_s(x);
    return y.has_value() ? Figure8Residual(lambda, rate, a, x, *y)[1]
                         : std::numeric_limits<double>::quiet_NaN();
  };
  const std::vector<double> grid = LogSpace(kBoxLo, kBoxHi, 200);
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    const double lo = outer(grid[i]);
    const double hi = outer(grid[i + 1]);
    if (std::isnan(lo) || std::isnan(hi) || lo * hi > 0) continue;
    const auto root = BisectRoot(outer, grid[i], grid[i + 1]);
    if (!root.has_value()) continue;
    const auto y = t_of_s(*root);
    if (!y.has_value()) continue;
    s = *root;
    t = *y;
    return Norm(Figure8Residual(lambda, rate, a, s, t)) < kSolveTolerance;
  }
  return false;
}

}  // namespace

absl::Status ValidatePmf(std::span<const double> p) {
  if (p.empty()) return absl::InvalidArgumentError("empty probability vector");
  double total = 0;
  for (double v : p) {
    if (!(v >= 0) || !std::isfinite(v)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("probabilities must be finite and >= 0, got %g", v));
    }
    total += v;
  }
  if (std::abs(total - 1) > kMassTolerance) {
    return absl::InvalidArgumentError(
        absl::StrFormat("probabilities sum to %.17g, not 1", total));
  }
  return absl::OkStatus();
}

absl::StatusOr<FiniteMechanismPair> FiniteMechanismPair::Create(
    std::vector<double> p, std::vector<double> p_prime) {
  if (p.size() != p_prime.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "support sizes differ: %d vs %d", p.size(), p_prime.size()));
  }
  RETURN_IF_ERROR(ValidatePmf(p));
  RETURN_IF_ERROR(ValidatePmf(p_prime));
  return FiniteMechanismPair(std::move(p), std::move(p_prime));
}

FiniteMechanismPair FiniteMechanismPair::Swapped() const {
  return FiniteMechanismPair(p_prime_, p_);
}

absl::StatusOr<std::vector<double>> RepeatedMaxDistribution(
    std::span<const double> q, const RepetitionDistribution& dist) {
  RETURN_IF_ERROR(ValidatePmf(q));
  const std::vector<double> suffix = SuffixMass(q);
  std::vector<double> law(q.size());
  double above = 0;  // mass of outcomes better than i
  for (size_t i = 0; i < q.size(); ++i) {
    law[i] = std::max(0.0, PgfIncrement(dist, suffix[i + 1], q[i], above + q[i]));
    above += q[i];
  }
  const double none = ProbabilityOfZero(dist);
  if (none > 0) law.push_back(none);
  return law;
}

absl::StatusOr<std::vector<BruteForceResult>> BruteForceRepeatedMax(
    std::span<const std::vector<double>> qs,
    const RepetitionDistribution& dist, double residual) {
  for (const std::vector<double>& q : qs) RETURN_IF_ERROR(ValidatePmf(q));
  ASSIGN_OR_RETURN(const int64_t k_limit, SeriesLimit(dist, residual));
  std::vector<std::vector<double>> suffix, powers;
  std::vector<BruteForceResult> out(qs.size());
  for (size_t j = 0; j < qs.size(); ++j) {
    suffix.push_back(SuffixMass(qs[j]));
    // powers[j][i] = suffix[j][i]^k, updated as k grows.
    powers.emplace_back(qs[j].size() + 1, 1.0);
    out[j].law.assign(qs[j].size(), 0.0);
  }
  const double none = Pmf(dist, 0);
  // Kahan-summed K-mass seen so far.
  double covered = none, carry = 0;
  const double mean = Mean(dist);
  int64_t k = 1;
  for (; k <= k_limit; ++k) {
    const double w = Pmf(dist, k);
    const double y = w - carry;
    const double t = covered + y;
    carry = (t - covered) - y;
    covered = t;
    for (size_t j = 0; j < qs.size(); ++j) {
      std::vector<double>& pw = powers[j];
      const std::vector<double>& sf = suffix[j];
      for (size_t i = 0; i < pw.size(); ++i) pw[i] *= sf[i];
      if (w == 0) continue;
      std::vector<double>& law = out[j].law;
      for (size_t i = 0; i < law.size(); ++i) {
        law[i] += w * (pw[i] - pw[i + 1]);
      }
    }
    if (1 - covered < residual && k >= mean) break;
  }
  for (BruteForceResult& r : out) {
    r.k_max = std::min(k, k_limit);
    if (ProbabilityOfZero(dist) > 0) r.law.push_back(none);
    r.residual = std::max(0.0, 1 - covered);
  }
  return out;
}

absl::StatusOr<BruteForceResult> BruteForceRepeatedMax(
    std::span<const double> q, const RepetitionDistribution& dist,
    double residual) {
  const std::vector<double> one(q.begin(), q.end());
  ASSIGN_OR_RETURN(std::vector<BruteForceResult> out,
                   BruteForceRepeatedMax(std::span(&one, 1), dist, residual));
  return std::move(out.front());
}

double RenyiDivergence(std::span<const double> p,
                       std::span<const double> p_prime, double lambda) {
  if (p.size() != p_prime.size() || !(lambda >= 1)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (lambda == 1) {
    double kl = 0;
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= 0) continue;
      if (p_prime[i] <= 0) return kInf;
      kl += p[i] * std::log(p[i] / p_prime[i]);
    }
    return std::max(0.0, kl);
  }
  if (std::isinf(lambda)) {
    double worst = -kInf;
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= 0) continue;
      if (p_prime[i] <= 0) return kInf;
      worst = std::max(worst, std::log(p[i] / p_prime[i]));
    }
    return std::max(0.0, worst);
  }
  std::vector<double> terms;
  terms.reserve(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    if (p_prime[i] <= 0) return kInf;
    terms.push_back(lambda * std::log(p[i]) +
                    (1 - lambda) * std::log(p_prime[i]));
  }
  return std::max(0.0, LogSumExp(terms) / (lambda - 1));
}

double TvDistance(std::span<const double> u, std::span<const double> v) {
  double total = 0;
  const size_t n = std::max(u.size(), v.size());
  for (size_t i = 0; i < n; ++i) {
    const double a = i < u.size() ? u[i] : 0.0;
    const double b = i < v.size() ? v[i] : 0.0;
    total += std::abs(a - b);
  }
  return total / 2;
}

absl::StatusOr<FiniteMechanismPair> WorstCasePointMass(double epsilon) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError("epsilon must be positive and finite");
  }
  const double low = 1 / (1 + std::exp(epsilon));
  const double high = 1 / (1 + std::exp(-epsilon));
  return FiniteMechanismPair::Create({low, high}, {high, low});
}

absl::StatusOr<ConditionedPair> ConditionPair(const FiniteMechanismPair& pair,
                                              std::span<const int> subset) {
  std::vector<double> p;
  std::vector<double> pp;
  double qs = 0;
  double qs_prime = 0;
  for (int i : subset) {
    if (i < 0 || static_cast<size_t>(i) >= pair.size()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("index %d outside the support", i));
    }
    p.push_back(pair.p()[i]);
    pp.push_back(pair.p_prime()[i]);
    qs += pair.p()[i];
    qs_prime += pair.p_prime()[i];
  }
  if (!(qs > 0) || !(qs_prime > 0)) {
    return absl::InvalidArgumentError(
        "conditioning set has zero mass under one side");
  }
  for (double& v : p) v /= qs;
  for (double& v : pp) v /= qs_prime;
  ASSIGN_OR_RETURN(FiniteMechanismPair conditioned,
                   FiniteMechanismPair::Create(std::move(p), std::move(pp)));
  return ConditionedPair{std::move(conditioned), qs, qs_prime};
}

absl::StatusOr<ConditionalInstance> WorstCaseConditional(double s, double t,
                                                         double a) {
  if (!(s > 0) || !(t > 0) || !(a > 0 && a <= 0.25) || !std::isfinite(s) ||
      !std::isfinite(t)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need s > 0, t > 0 and a in (0, 1/4]; got s=%g t=%g a=%g", s, t, a));
  }
  const double es = std::exp(-s);
  const double est = std::exp(-s - t);
  std::vector<double> q = {a * es, a * es, 1 - 2 * a * es};
  std::vector<double> qp = {a * est, a, 1 - a - a * est};
  ASSIGN_OR_RETURN(FiniteMechanismPair pair,
                   FiniteMechanismPair::Create(std::move(q), std::move(qp)));
  const std::vector<int> subset = {0, 1};
  ASSIGN_OR_RETURN(ConditionedPair conditioned, ConditionPair(pair, subset));
  // Exact forms of the conditioned laws.
  ASSIGN_OR_RETURN(conditioned.pair,
                   FiniteMechanismPair::Create(
                       {0.5, 0.5}, {est / (1 + est), 1 / (1 + est)}));
  return ConditionalInstance{std::move(pair), subset, std::move(conditioned)};
}

double ConditionalLowerBound(double s, double t, double lambda) {
  if (std::isinf(lambda)) return s + t - std::log(2.0);
  return s + t - lambda * std::log(2.0) / (lambda - 1);
}

absl::StatusOr<Figure8Solution> SolveFigure8(double lambda, double rate,
                                             double a) {
  if (!(lambda > 1) || std::isinf(lambda) || !(rate > 0) ||
      !(a > 0 && a <= 0.25)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need finite lambda > 1, rate > 0, a in (0, 1/4]; got %g, %g, %g",
        lambda, rate, a));
  }
  const std::array<double, 6> starts = {0.5, 1, 2, 4, 8, 16};
  for (double s0 : starts) {
    for (double t0 : starts) {
      double s = s0;
      double t = t0;
      if (NewtonSolve(lambda, rate, a, s, t)) {
        return Figure8Solution{s, t,
                               Norm(Figure8Residual(lambda, rate, a, s, t))};
      }
    }
  }
  double s = 1;
  double t = 1;
  if (BisectionSolve(lambda, rate, a, s, t)) {
    return Figure8Solution{s, t, Norm(Figure8Residual(lambda, rate, a, s, t))};
  }
  return absl::NotFoundError(absl::StrFormat(
      "no (s, t) in [%g, %g]^2 gives both divergences %g at lambda=%g, a=%g",
      kBoxLo, kBoxHi, rate, lambda, a));
}

absl::StatusOr<std::vector<double>> MonteCarloBestOfK(
    std::span<const double> q, const RepetitionDistribution& dist,
    int64_t trials, uint64_t seed, int workers) {
  RETURN_IF_ERROR(ValidatePmf(q));
  if (trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  const size_t n = q.size();
  const bool has_none = ProbabilityOfZero(dist) > 0;
  const std::vector<double> suffix = SuffixMass(q);
  std::vector<double> prefix(n);
  double running = 0;
  for (size_t i = 0; i < n; ++i) {
    running += q[i];
    prefix[i] = running;
  }
  prefix[n - 1] = 1;

  std::vector<std::vector<int64_t>> counts(
      kMonteCarloShards, std::vector<int64_t>(n + 1, 0));
  auto run_shard = [&](int shard) {
    const int64_t begin = trials * shard / kMonteCarloShards;
    const int64_t end = trials * (shard + 1) / kMonteCarloShards;
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(shard)));
    RepetitionSampler sampler(dist);
    std::vector<int64_t>& c = counts[shard];
    for (int64_t trial = begin; trial < end; ++trial) {
      const int64_t k = sampler.Sample(rng);
      if (k == 0) {
        ++c[n];
        continue;
      }
      size_t best = n - 1;
      if (k <= kLoopLimit) {
        for (int64_t draw = 0; draw < k; ++draw) {
          const double u = rng.Uniform01();
          size_t index = 0;
          while (index + 1 < n && prefix[index] < u) ++index;
          best = std::min(best, index);
        }
      } else {
        // Pr[best >= i] = suffix[i]^k.
        const double u = rng.Uniform01();
        const double kd = static_cast<double>(k);
        best = 0;
        while (best + 1 < n && std::pow(suffix[best + 1], kd) >= u) ++best;
      }
      ++c[best];
    }
  };
  const int threads = std::clamp(workers, 1, kMonteCarloShards);
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (int shard = w; shard < kMonteCarloShards; shard += threads) {
        run_shard(shard);
      }
    });
  }
  for (std::thread& th : pool) th.join();

  std::vector<double> freq(has_none ? n + 1 : n, 0.0);
  for (const auto& c : counts) {
    for (size_t i = 0; i < freq.size(); ++i) {
      freq[i] += static_cast<double>(c[i]);
    }
  }
  for (double& f : freq) f /= static_cast<double>(trials);
  return freq;
}

std::vector<NamedPair> OracleCorpus() {
  std::vector<NamedPair> corpus;
  for (double eps : {0.1, 0.5, 1.0, 2.0}) {
    corpus.push_back({absl::StrFormat("rr(eps=%g)", eps),
                      *WorstCasePointMass(eps)});
  }
  for (double a : {0.01, 0.25}) {
    for (auto [s, t] : {std::pair{0.5, 0.5}, std::pair{1.0, 2.0}}) {
      corpus.push_back({absl::StrFormat("triple(s=%g,t=%g,a=%g)", s, t, a),
                        WorstCaseConditional(s, t, a)->pair});
    }
  }
  constexpr std::array<double, 4> kLogRatio = {0.25, 0.5, 1, 2};
  for (int seed = 0; seed < 32; ++seed) {
    Rng rng(DeriveSeed(20240601, static_cast<uint64_t>(seed)));
    const double bound = kLogRatio[seed % kLogRatio.size()];
    std::vector<double> p(5);
    std::vector<double> pp(5);
    double total = 0;
    double total_prime = 0;
    for (int i = 0; i < 5; ++i) {
      p[i] = -std::log(rng.Uniform01());
      pp[i] = p[i] * std::exp(bound * (2 * rng.Uniform01() - 1));
      total += p[i];
      total_prime += pp[i];
    }
    for (int i = 0; i < 5; ++i) {
      p[i] /= total;
      pp[i] /= total_prime;
    }
    corpus.push_back({absl::StrFormat("random5(seed=%d,B=%g)", seed, bound),
                      *FiniteMechanismPair::Create(std::move(p), std::move(pp))});
  }
  return corpus;
}

}  // namespace repdp
