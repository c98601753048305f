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

#include <cmath>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "repdp/accountant.h"
#include "repdp/kdist.h"
#include "repdp/privacy_curve.h"
#include "repdp/rng.h"

namespace repdp {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;

using Vec = std::vector<double>;

constexpr double kInf = kInfiniteOrder;

std::vector<RepetitionDistribution> SmallGrid() {
  return {RepetitionDistribution::PointMass(1).value(),
          RepetitionDistribution::PointMass(3).value(),
          RepetitionDistribution::Geometric(0.1).value(),
          RepetitionDistribution::Logarithmic(0.05).value(),
          RepetitionDistribution::TruncatedNegativeBinomial(-0.5, 0.2).value(),
          RepetitionDistribution::Poisson(1).value(),
          RepetitionDistribution::Poisson(10).value(),
          RepetitionDistribution::Truncated(
              RepetitionDistribution::Poisson(10).value(), 3)
              .value()};
}

TEST(RepeatedMaxTest, RandomizedResponseExample) {
  const FiniteMechanismPair rr = WorstCasePointMass(1).value();
  EXPECT_THAT(rr.p(), ElementsAre(DoubleNear(0.2689, 1e-4),
                                  DoubleNear(0.7311, 1e-4)));
  const auto two = RepetitionDistribution::PointMass(2).value();
  const std::vector<double> a = RepeatedMaxDistribution(rr.p(), two).value();
  const std::vector<double> b =
      RepeatedMaxDistribution(rr.p_prime(), two).value();
  EXPECT_THAT(a, ElementsAre(DoubleNear(0.4655, 1e-4),
                             DoubleNear(0.5345, 1e-4)));
  EXPECT_NEAR(RenyiDivergence(a, b, kInf), 2.0, 1e-12);
}

TEST(RepeatedMaxTest, SingleRunIsIdentity) {
  for (const NamedPair& np : OracleCorpus()) {
    const std::vector<double> law =
        RepeatedMaxDistribution(np.pair.p(),
                                RepetitionDistribution::PointMass(1).value())
            .value();
    ASSERT_EQ(law.size(), np.pair.size());
    for (size_t i = 0; i < law.size(); ++i) {
      EXPECT_NEAR(law[i], np.pair.p()[i], 1e-15);
    }
  }
}

TEST(RepeatedMaxTest, SumsToOneAndMatchesEnumeration) {
  for (const NamedPair& np : OracleCorpus()) {
    for (const RepetitionDistribution& dist : SmallGrid()) {
      const std::vector<double> law =
          RepeatedMaxDistribution(np.pair.p(), dist).value();
      double total = 0;
      for (double v : law) total += v;
      EXPECT_NEAR(total, 1, 1e-12);
      const BruteForceResult brute =
          BruteForceRepeatedMax(np.pair.p(), dist).value();
      EXPECT_LT(brute.residual, 1e-12);
      ASSERT_EQ(brute.law.size(), law.size());
      for (size_t i = 0; i < law.size(); ++i) {
        EXPECT_NEAR(law[i], brute.law[i], 1e-9)
            << np.name << " " << dist.ToString() << " i=" << i;
      }
    }
  }
}

TEST(RepeatedMaxTest, NoOutputSlotWhenZeroRunsPossible) {
  const std::vector<double> law =
      RepeatedMaxDistribution(std::vector<double>{0.5, 0.5},
                              RepetitionDistribution::Poisson(1).value())
          .value();
  ASSERT_EQ(law.size(), 3);
  EXPECT_NEAR(law[2], std::exp(-1.0), 1e-15);
}

TEST(RepeatedMaxTest, RejectsInvalidPmf) {
  EXPECT_FALSE(RepeatedMaxDistribution(
                   std::vector<double>{0.5, 0.6}, RepetitionDistribution::PointMass(1).value())
                   .ok());
  EXPECT_FALSE(FiniteMechanismPair::Create({1.0}, {0.5, 0.5}).ok());
}

TEST(RenyiDivergenceTest, Examples) {
  const std::vector<double> p = {0.2, 0.3, 0.5};
  for (double lambda : {1.0, 1.5, 2.0, 10.0, kInf}) {
    EXPECT_EQ(RenyiDivergence(p, p, lambda), 0);
  }
  const FiniteMechanismPair rr = WorstCasePointMass(1).value();
  EXPECT_NEAR(RenyiDivergence(rr.p(), rr.p_prime(), kInf), 1, 1e-15);
  EXPECT_TRUE(std::isinf(RenyiDivergence(Vec{0.5, 0.5}, Vec{1, 0}, 2)));
  // Zero in p but not p': still finite.
  EXPECT_TRUE(std::isfinite(RenyiDivergence(Vec{1, 0}, Vec{0.5, 0.5}, 2)));
}

TEST(RenyiDivergenceTest, NonDecreasingInOrderAndPositive) {
  const std::vector<double> orders = {1, 1.5, 2, 3, 4, 8, 16, 32, 64, kInf};
  for (const NamedPair& np : OracleCorpus()) {
    for (const FiniteMechanismPair& pair : {np.pair, np.pair.Swapped()}) {
      double previous = 0;
      for (double lambda : orders) {
        const double d = RenyiDivergence(pair.p(), pair.p_prime(), lambda);
        EXPECT_GE(d, previous - 1e-12) << np.name << " " << lambda;
        EXPECT_GT(d, 0);
        previous = d;
      }
    }
  }
}

TEST(RenyiDivergenceTest, MergingOutcomesNeverIncreasesDivergence) {
  Rng rng(7);
  for (const NamedPair& np : OracleCorpus()) {
    if (np.pair.size() < 3) continue;
    for (int rep = 0; rep < 5; ++rep) {
      const size_t i = rng.UniformIndex(np.pair.size() - 1);
      std::vector<double> p = np.pair.p();
      std::vector<double> pp = np.pair.p_prime();
      p[i] += p[i + 1];
      pp[i] += pp[i + 1];
      p.erase(p.begin() + i + 1);
      pp.erase(pp.begin() + i + 1);
      for (double lambda : {1.0, 2.0, 8.0, kInf}) {
        EXPECT_LE(RenyiDivergence(p, pp, lambda),
                  RenyiDivergence(np.pair.p(), np.pair.p_prime(), lambda) +
                      1e-12);
      }
    }
  }
}

TEST(ConditionalInstanceTest, ConditionedLaws) {
  for (auto [s, t] : {std::pair{0.3, 0.7}, std::pair{2.0, 1.0}}) {
    const ConditionalInstance inst = WorstCaseConditional(s, t, 0.01).value();
    EXPECT_THAT(inst.conditioned.pair.p(),
                ElementsAre(DoubleNear(0.5, 1e-15), DoubleNear(0.5, 1e-15)));
    const double e = std::exp(-s - t);
    EXPECT_NEAR(inst.conditioned.pair.p_prime()[0], e / (1 + e), 1e-15);
    // Conditioning the raw pair gives the same laws.
    const ConditionedPair direct = ConditionPair(inst.pair, inst.subset).value();
    for (size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(direct.pair.p()[i], inst.conditioned.pair.p()[i], 1e-15);
      EXPECT_NEAR(direct.pair.p_prime()[i], inst.conditioned.pair.p_prime()[i],
                  1e-14);
    }
    for (double lambda : {2.0, 4.0, 32.0}) {
      EXPECT_GE(RenyiDivergence(inst.conditioned.pair.p(),
                                inst.conditioned.pair.p_prime(), lambda),
                ConditionalLowerBound(s, t, lambda));
    }
  }
  EXPECT_FALSE(WorstCaseConditional(1, 1, 0.3).ok());
}

TEST(ConditionPairTest, FullAndSingletonSets) {
  const FiniteMechanismPair pair =
      FiniteMechanismPair::Create({0.2, 0.3, 0.5}, {0.1, 0.6, 0.3}).value();
  const std::vector<int> all = {0, 1, 2};
  const ConditionedPair full = ConditionPair(pair, all).value();
  EXPECT_EQ(full.pair.p(), pair.p());
  EXPECT_EQ(full.qs, 1);
  const std::vector<int> one = {1};
  const ConditionedPair single = ConditionPair(pair, one).value();
  EXPECT_EQ(RenyiDivergence(single.pair.p(), single.pair.p_prime(), 4), 0);
  const FiniteMechanismPair zero =
      FiniteMechanismPair::Create({0, 1}, {0.5, 0.5}).value();
  const std::vector<int> first = {0};
  EXPECT_FALSE(ConditionPair(zero, first).ok());
}

TEST(SolveFigure8Test, ResidualAndEnvelopes) {
  for (double lambda : {2.0, 4.0, 8.0, 16.0, 32.0}) {
    const Figure8Solution sol = SolveFigure8(lambda, 0.1 * lambda).value();
    EXPECT_LT(sol.residual, 1e-8) << lambda;
    const ConditionalInstance inst =
        WorstCaseConditional(sol.s, sol.t, 0.01).value();
    const double exact = RenyiDivergence(
        inst.conditioned.pair.p(), inst.conditioned.pair.p_prime(), lambda);
    EXPECT_GE(exact, ConditionalLowerBound(sol.s, sol.t, lambda));
    const FiniteMechanismPair& pair = inst.pair;
    const Bound upper =
        ConditionalBound(
            [&](double o) { return RenyiDivergence(pair.p(), pair.p_prime(), o); },
            [&](double o) { return RenyiDivergence(pair.p_prime(), pair.p(), o); },
            inst.conditioned.qs, lambda, ConditionalSpec::Preset(2))
            .value();
    EXPECT_LE(exact, upper.epsilon) << lambda;
  }
}

TEST(SolveFigure8Test, SmallRateGivesSmallParameters) {
  double previous_s = 0;
  for (double rate : {1e-6, 1e-4, 1e-2, 1e-1}) {
    const Figure8Solution sol = SolveFigure8(4, rate).value();
    EXPECT_LT(sol.residual, 1e-10);
    EXPECT_GT(sol.s, previous_s);
    previous_s = sol.s;
  }
    // Both divergences scale like a (s^2 + t^2), so s and t shrink like
  // sqrt(rate / a).
  const Figure8Solution tiny = SolveFigure8(4, 1e-6).value();
  EXPECT_LT(tiny.s, 0.05);
  EXPECT_LT(tiny.t, 0.05);
}

TEST(MonteCarloTest, MatchesExactLaw) {
  const FiniteMechanismPair rr = WorstCasePointMass(1).value();
  const std::vector<double> q = OracleCorpus()[10].pair.p();
  for (const RepetitionDistribution& dist :
       {RepetitionDistribution::Geometric(0.1).value(),
        RepetitionDistribution::Poisson(1).value(),
        RepetitionDistribution::Logarithmic(0.001).value()}) {
    const std::vector<double> mc =
        MonteCarloBestOfK(q, dist, 1000000, 99).value();
    const std::vector<double> exact = RepeatedMaxDistribution(q, dist).value();
    EXPECT_LT(TvDistance(mc, exact), 0.005) << dist.ToString();
  }
  const std::vector<double> single =
      MonteCarloBestOfK(rr.p(), RepetitionDistribution::PointMass(1).value(),
                        200000, 5)
          .value();
  EXPECT_LT(TvDistance(single, rr.p()), 0.005);
  EXPECT_EQ(TvDistance(rr.p(), rr.p()), 0);
}

TEST(MonteCarloTest, IndependentOfWorkerCount) {
  const std::vector<double> q = {0.1, 0.2, 0.3, 0.4};
  const auto dist = RepetitionDistribution::Geometric(0.2).value();
  EXPECT_EQ(MonteCarloBestOfK(q, dist, 10000, 3, 1).value(),
            MonteCarloBestOfK(q, dist, 10000, 3, 4).value());
}

TEST(CorpusTest, Size) {
  const std::vector<NamedPair> corpus = OracleCorpus();
  EXPECT_GE(corpus.size(), 40);
  for (const NamedPair& np : corpus) {
    EXPECT_TRUE(ValidatePmf(np.pair.p()).ok());
    EXPECT_TRUE(ValidatePmf(np.pair.p_prime()).ok());
  }
}

}  // namespace
}  // namespace repdp
