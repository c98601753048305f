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

#include "repdp/tuner.h"

#include <cmath>
#include <map>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "repdp/json_io.h"
#include "repdp/rng.h"

namespace repdp {
namespace {

using ::testing::HasSubstr;
using ::testing::StartsWith;

// score = -(x - 0.3)^2 + small seeded noise.
std::vector<CandidateSpec> Quadratic(int m) {
  std::vector<CandidateSpec> out;
  for (int i = 0; i < m; ++i) {
    CandidateSpec c;
    c.id = "c" + std::to_string(i);
    const double x = m == 1 ? 0.0 : static_cast<double>(i) / (m - 1);
    c.hyperparameters = {{"x", x}};
    c.callable = [x](const RunContext& ctx) -> absl::StatusOr<TrialOutcome> {
      Rng rng(ctx.seed);
      return TrialOutcome{-(x - 0.3) * (x - 0.3) + 0.01 * rng.Uniform01(),
                          "run" + std::to_string(ctx.run_index)};
    };
    out.push_back(std::move(c));
  }
  return out;
}

TEST(SelectBestTest, HighestEarliestAndSentinelsLast) {
  std::vector<TrialResult> trials(4);
  for (int i = 0; i < 4; ++i) trials[i].run_index = i;
  EXPECT_FALSE(SelectBest({}).has_value());
  EXPECT_EQ(SelectBest(trials), 0u);  // all sentinels
  trials[2].score = -5;
  EXPECT_EQ(SelectBest(trials), 2u);
  trials[1].score = 1;
  trials[3].score = 1;
  EXPECT_EQ(SelectBest(trials), 1u);
}

TEST(TuneTest, ReplayIsIndependentOfWorkers) {
  auto dist = RepetitionDistribution::TruncatedNegativeBinomial(1, 0.05);
  auto base = PrivacyCurve::ZCdp(0.1);
  ASSERT_TRUE(dist.ok() && base.ok());
  TuneOptions one, four;
  one.workers = 1;
  four.workers = 4;
  auto a = Tune(Quadratic(5), *dist, *base, 7, one);
  auto b = Tune(Quadratic(5), *dist, *base, 7, four);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_GT(a->k_drawn, 0);
  EXPECT_EQ(ReportToJson(*a).dump(), ReportToJson(*b).dump());
  auto c = Tune(Quadratic(5), *dist, *base, 8, one);
  ASSERT_TRUE(c.ok());
  EXPECT_NE(ReportToJson(*a).dump(), ReportToJson(*c).dump());
}

TEST(TuneTest, CandidateFrequenciesAreUniform) {
  constexpr int kRuns = 100000;
  constexpr int kM = 5;
  std::vector<CandidateSpec> candidates(kM);
  for (int i = 0; i < kM; ++i) {
    candidates[i].id = std::to_string(i);
    candidates[i].callable = [](const RunContext&) -> absl::StatusOr<TrialOutcome> {
      return TrialOutcome{0, ""};
    };
  }
  auto dist = RepetitionDistribution::PointMass(kRuns);
  auto base = PrivacyCurve::PureDp(0.01);
  ASSERT_TRUE(dist.ok() && base.ok());
  TuneOptions options;
  options.analyze.lambdas = {2};
  auto report = Tune(candidates, *dist, *base, 1, options);
  ASSERT_TRUE(report.ok());
  std::map<std::string, int> counts;
  for (const TrialResult& t : report->trials) ++counts[t.candidate_id];
  const double mean = static_cast<double>(kRuns) / kM;
  const double sd = std::sqrt(kRuns * (1.0 / kM) * (1 - 1.0 / kM));
  for (const auto& [id, n] : counts) {
    EXPECT_LT(std::abs(n - mean), 3 * sd) << id;
  }
  // Earliest run wins the all-zero tie.
  EXPECT_EQ(report->best->run_index, 0);
}

TEST(TuneTest, FailedRunsAreSentinels) {
  std::vector<CandidateSpec> candidates(2);
  candidates[0].id = "broken";
  candidates[0].callable = [](const RunContext&) -> absl::StatusOr<TrialOutcome> {
    return absl::InternalError("boom");
  };
  candidates[1].id = "nan";
  candidates[1].callable = [](const RunContext&) -> absl::StatusOr<TrialOutcome> {
    return TrialOutcome{std::nan(""), ""};
  };
  auto dist = RepetitionDistribution::PointMass(6);
  auto base = PrivacyCurve::PureDp(1);
  auto report = Tune(candidates, *dist, *base, 3);
  ASSERT_TRUE(report.ok());
  ASSERT_TRUE(report->best.has_value());
  EXPECT_FALSE(report->best->score.has_value());
  EXPECT_FALSE(report->best->error.empty());
  EXPECT_TRUE(report->privacy.has_value());
}

TEST(TuneTest, KCapSwitchesToTruncatedLaw) {
  auto dist = RepetitionDistribution::TruncatedNegativeBinomial(1, 0.01);
  auto base = PrivacyCurve::ZCdp(0.1);
  TuneOptions options;
  options.k_cap = 3;
  auto report = Tune(Quadratic(3), *dist, *base, 11, options);
  ASSERT_TRUE(report.ok());
  EXPECT_LE(report->k_drawn, 3);
  EXPECT_EQ(report->distribution->family(), Family::kTruncated);
  for (const BoundPoint& p : report->privacy->points) {
    EXPECT_THAT(p.method, StartsWith(kMethodTruncated));
  }
}

TEST(TuneTest, LogarithmicPureBoundAtInfinity) {
  auto dist = RepetitionDistribution::TruncatedNegativeBinomial(0, 0.5);
  auto base = PrivacyCurve::PureDp(1);
  auto report = Tune(Quadratic(2), *dist, *base, 5);
  ASSERT_TRUE(report.ok());
  const BoundPoint& last = report->privacy->points.back();
  EXPECT_TRUE(std::isinf(last.lambda));
  EXPECT_NEAR(last.epsilon, 2.0, 1e-9);
}

TEST(TuneTest, WallClockCapAborts) {
  std::vector<CandidateSpec> candidates(1);
  candidates[0].id = "slow";
  candidates[0].callable = [](const RunContext&) -> absl::StatusOr<TrialOutcome> {
    volatile double x = 0;
    for (int i = 0; i < 20000000; ++i) x = x + 1;
    return TrialOutcome{0, ""};
  };
  auto dist = RepetitionDistribution::PointMass(200);
  auto base = PrivacyCurve::PureDp(1);
  TuneOptions options;
  options.wall_clock_cap_seconds = 1e-3;
  auto report = Tune(candidates, *dist, *base, 5, options);
  ASSERT_TRUE(report.ok());
  EXPECT_TRUE(report->aborted);
  EXPECT_FALSE(report->best.has_value());
  EXPECT_FALSE(report->privacy.has_value());
}

TEST(TuneTest, RejectsBadCandidates) {
  auto dist = RepetitionDistribution::PointMass(1);
  auto base = PrivacyCurve::PureDp(1);
  EXPECT_FALSE(Tune({}, *dist, *base, 1).ok());
  std::vector<CandidateSpec> dup = Quadratic(2);
  dup[1].id = dup[0].id;
  EXPECT_FALSE(Tune(dup, *dist, *base, 1).ok());
}

std::vector<CandidateSpec> Coin() {
  std::vector<CandidateSpec> c(1);
  c[0].id = "coin";
  c[0].callable = [](const RunContext& ctx) -> absl::StatusOr<TrialOutcome> {
    Rng rng(ctx.seed);
    return TrialOutcome{rng.Uniform01(), ""};
  };
  return c;
}

TEST(UntilSuccessTest, AttemptsAreGeometric) {
  auto base = PrivacyCurve::PureDp(0.5);
  UntilSuccessOptions options;
  options.lambdas = {2};
  constexpr int kJobs = 10000;
  std::map<int64_t, int> counts;
  for (int job = 0; job < kJobs; ++job) {
    auto report = TuneUntilSuccess(Coin(), 0.5, *base, *base, 0.5,
                                   DeriveSeed(99, job), options);
    ASSERT_TRUE(report.ok());
    ASSERT_TRUE(report->best.has_value());
    ++counts[report->k_drawn];
  }
  double tv = 0, covered = 0;
  for (const auto& [k, n] : counts) {
    const double p = std::pow(0.5, static_cast<double>(k));
    tv += std::abs(static_cast<double>(n) / kJobs - p);
    covered += p;
  }
  tv += 1 - covered;
  EXPECT_LT(tv / 2, 0.02);
}

TEST(UntilSuccessTest, MaxAttemptsIsOutsideTheModel) {
  auto base = PrivacyCurve::PureDp(0.5);
  UntilSuccessOptions options;
  options.lambdas = {2, 4};
  options.max_attempts = 5;
  auto report = TuneUntilSuccess(Coin(), 2.0, *base, *base, 0.5, 1, options);
  ASSERT_TRUE(report.ok());
  EXPECT_TRUE(report->outside_model);
  EXPECT_EQ(report->k_drawn, 5);
  EXPECT_FALSE(report->best.has_value());
  EXPECT_THAT(report->note, HasSubstr("5 attempts"));
}

TEST(UntilSuccessTest, RejectsZeroQs) {
  auto base = PrivacyCurve::PureDp(0.5);
  EXPECT_FALSE(TuneUntilSuccess(Coin(), 0.5, *base, *base, 0, 1).ok());
  EXPECT_FALSE(TuneUntilSuccess(Coin(), 0.5, *base, *base, 1.5, 1).ok());
}

TEST(UntilSuccessTest, BoundIsMonotoneInLambda) {
  auto base = PrivacyCurve::ZCdp(0.05);
  UntilSuccessOptions options;
  options.lambdas = {1.5, 2, 4, 8, 16};
  auto report = TuneUntilSuccess(Coin(), 0.1, *base, *base, 0.1, 1, options);
  ASSERT_TRUE(report.ok());
  const auto& pts = report->privacy->points;
  for (size_t i = 1; i < pts.size(); ++i) {
    EXPECT_LE(pts[i - 1].epsilon, pts[i].epsilon + 1e-12);
  }
}

TEST(SelectionDemoTest, SingleCandidateAlwaysSucceeds) {
  auto dist = RepetitionDistribution::TruncatedNegativeBinomial(1, 0.5);
  auto report = SelectionDemo({3.0}, 1.0,
                              SelectionMechanism::RepeatedLaplace(*dist), 1, 50);
  ASSERT_TRUE(report.ok());
  EXPECT_DOUBLE_EQ(report->success_rate, 1.0);
  EXPECT_NEAR(report->epsilon, 3.0, 1e-9);  // geometric: 3 eps
}

TEST(SelectionDemoTest, ExponentialMechanismConcentrates) {
  std::vector<double> u(8, 0.0);
  u[5] = 1;
  auto report = SelectionDemo(u, 100, SelectionMechanism::Exponential(), 4, 10000);
  ASSERT_TRUE(report.ok());
  int hits = 0;
  for (const SelectionOutcome& o : report->outcomes) hits += o.chosen == 5;
  EXPECT_GT(hits, 9990);
}

TEST(SelectionDemoTest, LargeKUsesExactMaximum) {
  // Mean far above the loop limit; the spike wins essentially always.
  auto dist = RepetitionDistribution::Poisson(5000);
  std::vector<double> u(8, 0.0);
  u[2] = 100;
  auto report = SelectionDemo(u, 1.0,
                              SelectionMechanism::RepeatedLaplace(*dist), 2, 200);
  ASSERT_TRUE(report.ok());
  for (const SelectionOutcome& o : report->outcomes) {
    EXPECT_GT(o.k_drawn, 1024);
    EXPECT_EQ(o.chosen, 2);
  }
}

}  // namespace
}  // namespace repdp
