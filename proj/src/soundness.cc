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

#include "repdp/soundness.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "repdp/accountant.h"
#include "repdp/numeric.h"
#include "repdp/status_macros.h"

namespace repdp {
namespace {

constexpr double kInf = kInfiniteOrder;

struct PairResult {
  absl::Status status;
  std::vector<SoundnessRow> rows;
};

std::string Num(double x) {
  return std::isinf(x) ? (x > 0 ? "inf" : "-inf")
                       : absl::StrFormat("%.17g", x);
}

absl::StatusOr<std::vector<SoundnessRow>> CheckPair(
    const NamedPair& named,
    const std::vector<RepetitionDistribution>& distributions,
    const std::vector<double>& lambdas) {
  const FiniteMechanismPair& pair = named.pair;
  ASSIGN_OR_RETURN(const PrivacyCurve base, ExactBaseCurve(pair, lambdas));
  AnalyzeOptions options;
  options.lambdas = lambdas;

  // The generic part of a truncated bound depends only on the inner law.
  std::map<std::string, std::vector<Bound>> generic_cache;
  std::vector<SoundnessRow> rows;
  for (const RepetitionDistribution& dist : distributions) {
    std::vector<double> bounds(lambdas.size());
    std::vector<std::string> methods(lambdas.size());
    if (dist.family() == Family::kTruncated) {
      const RepetitionDistribution& inner = dist.inner();
      std::vector<Bound>& generic = generic_cache[inner.ToString()];
      if (generic.empty()) {
        for (double lambda : lambdas) {
          const std::vector<double> orders = {lambda, kInf};
          ASSIGN_OR_RETURN(Bound b, GenericBound(inner, base, lambda, orders));
          generic.push_back(std::move(b));
        }
      }
      for (size_t j = 0; j < lambdas.size(); ++j) {
        ASSIGN_OR_RETURN(const double extra,
                         TruncationPenalty(inner, dist.limit(), lambdas[j]));
        bounds[j] = generic[j].epsilon + extra;
        methods[j] = kMethodTruncated;
      }
    } else {
      ASSIGN_OR_RETURN(const TuningBound tb, Analyze(dist, base, options));
      for (size_t j = 0; j < lambdas.size(); ++j) {
        bounds[j] = tb.points[j].epsilon;
        methods[j] = tb.points[j].method;
      }
    }
    for (const FiniteMechanismPair& side : {pair, pair.Swapped()}) {
      ASSIGN_OR_RETURN(const std::vector<double> a,
                       RepeatedMaxDistribution(side.p(), dist));
      ASSIGN_OR_RETURN(const std::vector<double> b,
                       RepeatedMaxDistribution(side.p_prime(), dist));
      for (size_t j = 0; j < lambdas.size(); ++j) {
        SoundnessRow row;
        row.instance = &side == &pair ? named.name
                                      : absl::StrCat(named.name, "/swapped");
        row.distribution = dist.ToString();
        row.lambda = lambdas[j];
        row.exact = RenyiDivergence(a, b, lambdas[j]);
        row.bound = bounds[j];
        row.slack = row.bound - row.exact;
        row.method = methods[j];
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace

std::vector<RepetitionDistribution> SoundnessDistributions() {
  std::vector<RepetitionDistribution> out;
  for (int64_t k = 1; k <= 10; ++k) {
    out.push_back(*RepetitionDistribution::PointMass(k));
  }
  for (double eta : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
    for (double mean : {2.0, 10.0, 100.0}) {
      out.push_back(*RepetitionDistribution::TruncatedNegativeBinomial(
          eta, *TnbGammaForMean(eta, mean)));
    }
  }
  for (double mu : {1.0, 10.0, 100.0}) {
    out.push_back(*RepetitionDistribution::Poisson(mu));
  }
  const RepetitionDistribution inners[] = {
      *RepetitionDistribution::Geometric(0.1),
      *RepetitionDistribution::Logarithmic(*TnbGammaForMean(0, 10)),
      *RepetitionDistribution::Poisson(10)};
  for (int64_t m : {3, 10}) {
    for (const RepetitionDistribution& inner : inners) {
      out.push_back(*RepetitionDistribution::Truncated(inner, m));
    }
  }
  return out;
}

absl::StatusOr<PrivacyCurve> ExactBaseCurve(const FiniteMechanismPair& pair,
                                            const std::vector<double>& extra) {
  std::vector<double> orders = LogSpace(1.01, 1e4, 80);
  orders.insert(orders.end(), extra.begin(), extra.end());
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  if (!std::isinf(orders.back())) orders.push_back(kInf);
  std::vector<RdpPoint> points;
  double running = 0;
  for (double lambda : orders) {
    const double d =
        std::max(RenyiDivergence(pair.p(), pair.p_prime(), lambda),
                 RenyiDivergence(pair.p_prime(), pair.p(), lambda));
    running = std::max(running, d);
    points.push_back({lambda, running});
  }
  return PrivacyCurve::RdpTable(std::move(points));
}

absl::StatusOr<std::vector<SoundnessRow>> RunSoundnessMatrix(
    const std::vector<NamedPair>& corpus,
    const std::vector<RepetitionDistribution>& distributions,
    const SoundnessOptions& options) {
  std::vector<double> lambdas = options.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<PairResult> results(corpus.size());
  const int threads =
      std::clamp<int>(options.workers, 1, std::max<int>(1, corpus.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = w; i < corpus.size(); i += threads) {
        auto rows = CheckPair(corpus[i], distributions, lambdas);
        if (rows.ok()) {
          results[i].rows = *std::move(rows);
        } else {
          results[i].status = rows.status();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  std::vector<SoundnessRow> all;
  for (PairResult& r : results) {
    RETURN_IF_ERROR(r.status);
    for (SoundnessRow& row : r.rows) all.push_back(std::move(row));
  }
  return all;
}

absl::StatusOr<std::vector<SandwichRow>> PointMassSandwich(
    const std::vector<double>& epsilons, const std::vector<int64_t>& ks,
    const std::vector<double>& lambdas) {
  std::vector<SandwichRow> rows;
  for (double eps : epsilons) {
    ASSIGN_OR_RETURN(const FiniteMechanismPair pair, WorstCasePointMass(eps));
    for (int64_t k : ks) {
      ASSIGN_OR_RETURN(const RepetitionDistribution dist,
                       RepetitionDistribution::PointMass(k));
      ASSIGN_OR_RETURN(const std::vector<double> p,
                       RepeatedMaxDistribution(pair.p(), dist));
      ASSIGN_OR_RETURN(const std::vector<double> pp,
                       RepeatedMaxDistribution(pair.p_prime(), dist));
      for (double lambda : lambdas) {
        SandwichRow row;
        row.epsilon = eps;
        row.k = k;
        row.lambda = lambda;
        row.exact = std::max(RenyiDivergence(p, pp, lambda),
                             RenyiDivergence(pp, p, lambda));
        row.lower = LowerBoundPointMass(eps, k, lambda);
        const double kd = static_cast<double>(k);
        row.upper = std::isinf(lambda)
                        ? kd * eps
                        : kd * eps + std::log(kd) / (lambda - 1);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<SoundnessRow> SandwichToSoundness(
    const std::vector<SandwichRow>& rows) {
  std::vector<SoundnessRow> out;
  for (const SandwichRow& r : rows) {
    const std::string instance = absl::StrFormat("rr(eps=%g)", r.epsilon);
    const std::string dist = absl::StrFormat("point(k=%d)", r.k);
    out.push_back({instance, dist, r.lambda, r.exact, r.upper,
                   r.upper - r.exact, "sandwich_upper"});
    out.push_back({instance, dist, r.lambda, r.exact, r.lower,
                   r.exact - r.lower, "sandwich_lower"});
  }
  return out;
}

std::string SoundnessCsv(const std::vector<SoundnessRow>& rows) {
  std::string out = "instance,distribution,lambda,exact,bound,slack,method\n";
  for (const SoundnessRow& r : rows) {
    absl::StrAppend(&out, "\"", r.instance, "\",\"", r.distribution, "\",",
                    Num(r.lambda), ",", Num(r.exact), ",", Num(r.bound), ",",
                    Num(r.slack), ",", r.method, "\n");
  }
  return out;
}

}  // namespace repdp
