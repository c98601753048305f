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

#include <cmath>
#include <cstdint>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace repdp {
namespace {

using ::testing::DoubleNear;

constexpr double kTolerance = 1e-9;

RepetitionDistribution Tnb(double eta, double gamma) {
  return RepetitionDistribution::TruncatedNegativeBinomial(eta, gamma).value();
}
RepetitionDistribution PoissonDist(double mu) {
  return RepetitionDistribution::Poisson(mu).value();
}
RepetitionDistribution Point(int64_t k) {
  return RepetitionDistribution::PointMass(k).value();
}

std::vector<RepetitionDistribution> Grid() {
  std::vector<RepetitionDistribution> grid;
  for (double eta : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
    for (double gamma : {0.05, 0.3, 0.7}) grid.push_back(Tnb(eta, gamma));
  }
  for (double mu : {0.5, 1.0, 10.0, 100.0}) grid.push_back(PoissonDist(mu));
  for (int64_t k : {1, 2, 7}) grid.push_back(Point(k));
  grid.push_back(
      RepetitionDistribution::Truncated(PoissonDist(10), 3).value());
  grid.push_back(RepetitionDistribution::Truncated(Tnb(0, 0.1), 10).value());
  return grid;
}

TEST(PmfTest, Examples) {
  EXPECT_NEAR(Pmf(Tnb(1, 0.5), 2), 0.25, 1e-15);
  EXPECT_NEAR(Pmf(PoissonDist(1), 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(Pmf(Tnb(0, 0.5), 1), 0.5 / std::log(2.0), 1e-15);
  for (double eta : {-0.5, 0.0, 2.0}) EXPECT_EQ(Pmf(Tnb(eta, 0.3), 0), 0.0);
}

TEST(PmfTest, GeometricMatchesClosedForm) {
  const double gamma = 0.3;
  for (int k = 1; k < 40; ++k) {
    EXPECT_NEAR(Pmf(Tnb(1, gamma), k), gamma * std::pow(1 - gamma, k - 1),
                1e-15);
  }
}

TEST(PmfTest, NearZeroEtaApproachesLogarithmic) {
  for (int k = 1; k < 30; ++k) {
    EXPECT_NEAR(Pmf(Tnb(1e-8, 0.2), k), Pmf(Tnb(0, 0.2), k), 1e-6);
  }
}

TEST(PmfTest, RejectsBadParameters) {
  EXPECT_FALSE(RepetitionDistribution::TruncatedNegativeBinomial(-1, 0.5).ok());
  EXPECT_FALSE(RepetitionDistribution::TruncatedNegativeBinomial(1, 0).ok());
  EXPECT_FALSE(RepetitionDistribution::TruncatedNegativeBinomial(1, 1).ok());
  EXPECT_FALSE(RepetitionDistribution::Poisson(0).ok());
  EXPECT_FALSE(RepetitionDistribution::PointMass(0).ok());
  EXPECT_FALSE(RepetitionDistribution::Truncated(Point(3), 0).ok());
}

TEST(PmfTest, AliasesResolve) {
  EXPECT_EQ(RepetitionDistribution::Geometric(0.4).value(), Tnb(1, 0.4));
  EXPECT_EQ(RepetitionDistribution::Logarithmic(0.4).value(), Tnb(0, 0.4));
}

TEST(PmfTest, SumsToOne) {
  for (const auto& dist : Grid()) {
    const int64_t limit = SeriesLimit(dist).value();
    double total = 0;
    for (int64_t k = 0; k <= limit; ++k) total += Pmf(dist, k);
    EXPECT_NEAR(total, 1.0, kTolerance) << dist.ToString();
  }
}

TEST(PmfTest, TruncatedRenormalizes) {
  const auto inner = PoissonDist(10);
  const auto dist = RepetitionDistribution::Truncated(inner, 3).value();
  double mass = 0;
  for (int k = 0; k <= 3; ++k) mass += Pmf(inner, k);
  for (int k = 0; k <= 3; ++k) {
    EXPECT_NEAR(Pmf(dist, k), Pmf(inner, k) / mass, 1e-15);
  }
  EXPECT_EQ(Pmf(dist, 4), 0.0);
  EXPECT_NEAR(dist.inner_mass_within_limit(), mass, 1e-15);
}

TEST(MeanTest, Examples) {
  EXPECT_NEAR(Mean(Tnb(1, 0.1)), 10.0, 1e-12);
  EXPECT_NEAR(Mean(Tnb(0, 0.5)), 1.0 / std::log(2.0), 1e-12);
  EXPECT_EQ(Mean(PoissonDist(7)), 7.0);
  EXPECT_EQ(Mean(Point(4)), 4.0);
}

TEST(PgfTest, Examples) {
  EXPECT_NEAR(Pgf(PoissonDist(2), 0.5).value(), std::exp(-1.0), 1e-15);
  for (const auto& dist : Grid()) {
    EXPECT_NEAR(Pgf(dist, 1.0).value(), 1.0, kTolerance) << dist.ToString();
    EXPECT_NEAR(PgfDerivative(dist, 1.0).value(), Mean(dist),
                kTolerance * std::max(1.0, Mean(dist)))
        << dist.ToString();
  }
}

TEST(PgfTest, MatchesSeries) {
  for (const auto& dist : Grid()) {
    const int64_t limit = SeriesLimit(dist).value();
    for (double x : {0.0, 0.25, 0.5, 0.75, 0.99}) {
      double f = 0;
      double df = 0;
      for (int64_t k = limit; k >= 0; --k) {
        f += Pmf(dist, k) * std::pow(x, k);
        if (k > 0) df += k * Pmf(dist, k) * std::pow(x, k - 1);
      }
      EXPECT_NEAR(Pgf(dist, x).value(), f, kTolerance) << dist.ToString();
      EXPECT_NEAR(PgfDerivative(dist, x).value(), df,
                  kTolerance * std::max(1.0, df))
          << dist.ToString() << " x=" << x;
    }
  }
}

TEST(PgfTest, RejectsOutOfDomain) {
  EXPECT_FALSE(Pgf(Tnb(1, 0.5), 2.0).ok());
  EXPECT_FALSE(Pgf(PoissonDist(1), -0.1).ok());
  EXPECT_TRUE(Pgf(PoissonDist(1), 3.0).ok());
}

TEST(SampleTest, PointMassAndTruncatedSupport) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(Sample(Point(5), rng), 5);
  RepetitionSampler sampler(
      RepetitionDistribution::Truncated(PoissonDist(10), 3).value());
  for (int i = 0; i < 1000; ++i) {
    const int64_t k = sampler.Sample(rng);
    EXPECT_GE(k, 0);
    EXPECT_LE(k, 3);
  }
}

TEST(SampleTest, Deterministic) {
  RepetitionSampler a(Tnb(0.5, 0.1));
  RepetitionSampler b(Tnb(0.5, 0.1));
  Rng ra(42);
  Rng rb(42);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.Sample(ra), b.Sample(rb));
}

TEST(SampleTest, LogarithmicMean) {
  RepetitionSampler sampler(Tnb(0, 0.5));
  Rng rng(2024);
  constexpr int kDraws = 1'000'000;
  double total = 0;
  for (int i = 0; i < kDraws; ++i) total += sampler.Sample(rng);
  EXPECT_NEAR(total / kDraws, 1.0 / std::log(2.0), 0.01);
}

TEST(SampleTest, EmpiricalPmfCloseInTotalVariation) {
  constexpr int kDraws = 1'000'000;
  Rng rng(7);
  for (const auto& dist :
       {Tnb(-0.5, 0.05), Tnb(2, 0.3), PoissonDist(10), Tnb(0, 0.05)}) {
    RepetitionSampler sampler(dist);
    std::vector<double> counts;
    for (int i = 0; i < kDraws; ++i) {
      const int64_t k = sampler.Sample(rng);
      if (k >= static_cast<int64_t>(counts.size())) counts.resize(k + 1);
      counts[k] += 1;
    }
    double cdf = 0;
    double tv = 0;
    for (int64_t k = 0; cdf < 0.99; ++k) {
      const double p = Pmf(dist, k);
      cdf += p;
      const double empirical =
          k < static_cast<int64_t>(counts.size()) ? counts[k] / kDraws : 0;
      tv += 0.5 * std::abs(p - empirical);
    }
    EXPECT_LT(tv, 0.01) << dist.ToString();
  }
}

TEST(SampleTest, DirectTailSamplerAboveTableCap) {
  // Mean about 7e5; a sizeable share of the mass is above the table cap.
  const auto dist = Tnb(0, 1e-6);
  RepetitionSampler sampler(dist);
  Rng rng(3);
  constexpr int kDraws = 20000;
  int above = 0;
  for (int i = 0; i < kDraws; ++i) {
    if (sampler.Sample(rng) > RepetitionSampler::kTableCap) ++above;
  }
  double below_mass = 0;
  for (int64_t k = 1; k <= RepetitionSampler::kTableCap; ++k) {
    below_mass += Pmf(dist, k);
  }
  const double expected = 1 - below_mass;
  EXPECT_NEAR(static_cast<double>(above) / kDraws, expected,
              5 * std::sqrt(expected * (1 - expected) / kDraws));
}

TEST(TailBoundTest, PoissonOptimum) {
  // t = ln 5: exp(e^t - 1 - 5t) = e^4 / 5^5.
  EXPECT_NEAR(TailBound(PoissonDist(1), 5).value(), std::exp(4.0) / 3125.0,
              1e-9);
}

TEST(TailBoundTest, ClampedForPointMass) {
  EXPECT_EQ(TailBound(Point(3), 3).value(), 1.0);
}

TEST(TailBoundTest, DominatesExactTail) {
  for (const auto& dist : Grid()) {
    double cdf = 0;
    for (int64_t k = 1; k < 60; ++k) {
      cdf += Pmf(dist, k - 1);
      EXPECT_GE(TailBound(dist, k).value(), 1 - cdf - 1e-12)
          << dist.ToString() << " k=" << k;
    }
  }
}

TEST(TruncationStatsTest, Examples) {
  auto stats = ComputeTruncationStats(Point(3), 5).value();
  EXPECT_EQ(stats.tail_probability, 0.0);
  EXPECT_EQ(stats.tail_mean, 0.0);

  stats = ComputeTruncationStats(PoissonDist(1), 0).value();
  EXPECT_NEAR(stats.tail_probability, 1 - std::exp(-1.0), 1e-12);
  EXPECT_NEAR(stats.tail_mean, 1.0, 1e-12);

  stats = ComputeTruncationStats(Tnb(1, 0.5), 1).value();
  EXPECT_NEAR(stats.tail_probability, 0.5, 1e-12);
  EXPECT_NEAR(stats.tail_mean, 1.5, 1e-12);
}

TEST(ReweightTest, PgfIdentity) {
  const double s = 0.7;
  for (const auto& dist : Grid()) {
    const auto reweighted = ReweightBySurvival(dist, s).value();
    const double norm = PgfUnit(dist, s);
    for (double x : {0.0, 0.3, 0.6, 0.9, 1.0}) {
      EXPECT_NEAR(PgfUnit(reweighted, x), PgfUnit(dist, x * s) / norm,
                  kTolerance)
          << dist.ToString();
    }
  }
}

TEST(TnbGammaForMeanTest, Inverts) {
  for (double eta : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
    for (double mean : {2.0, 10.0, 100.0}) {
      const double gamma = TnbGammaForMean(eta, mean).value();
      EXPECT_THAT(Mean(Tnb(eta, gamma)), DoubleNear(mean, 1e-9 * mean));
    }
  }
  EXPECT_NEAR(TnbGammaForMean(1, 10).value(), 0.1, 1e-12);
}

}  // namespace
}  // namespace repdp
