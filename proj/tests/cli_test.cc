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

#include "repdp/cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "repdp/accountant.h"
#include "repdp/json_io.h"
#include "repdp/kdist.h"

namespace repdp {
namespace {

using ::testing::HasSubstr;
using ::testing::StartsWith;
using json = nlohmann::json;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult Invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

double EpsilonAtInfinity(const std::string& out) {
  const json j = json::parse(out);
  return NumberFromJson(j["points"].back()["epsilon"]).value();
}

TEST(CliAccountTest, PureGeometricAndLogarithmic) {
  CliResult r = Invoke({"account", "--base", "pure:1", "--dist", "tnb:eta=1,gamma=0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(EpsilonAtInfinity(r.out), 3.0, 1e-6);
  r = Invoke({"account", "--base", "pure:1", "--dist", "tnb:eta=0,gamma=0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(EpsilonAtInfinity(r.out), 2.0, 1e-6);
}

TEST(CliAccountTest, SingleRunEqualsBase) {
  const CliResult r = Invoke({"account", "--base", "pure:1", "--dist", "point:1",
                           "--lambda-grid", "2,8,inf", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "lambda,epsilon_prime,method,lambda_hat\n"
            "2,1,base,\n8,1,base,\ninf,1,base,\n");
}

TEST(CliAccountTest, ApproxLineMatchesLibrary) {
  const CliResult r = Invoke({"account", "--base", "zcdp:0.1", "--dist", "poisson:10",
                           "--delta", "1e-6"});
  ASSERT_EQ(r.code, 0) << r.err;
  AnalyzeOptions options;
  options.target_delta = 1e-6;
  const TuningBound bound =
      Analyze(RepetitionDistribution::Poisson(10).value(),
              PrivacyCurve::ZCdp(0.1).value(), options)
          .value();
  const json j = json::parse(r.out);
  EXPECT_EQ(j["approx_dp"]["epsilon"].get<double>(), bound.approx_dp->epsilon);
  EXPECT_EQ(j["approx_dp"]["delta"].get<double>(), 1e-6);
}

TEST(CliErrorsTest, UsageAndValidationExitTwoWithOneLine) {
  for (const std::vector<std::string>& args :
       std::vector<std::vector<std::string>>{
           {},
           {"account"},
           {"account", "--dist", "binomial:3"},
           {"account", "--dist", "point:2", "--base", "pure:-1"},
           {"account", "--dist", "point:2", "--lambda-grid", "0.5"},
           {"frobnicate"},
           {"figures", "--figure", "pie"},
           {"figures", "--figure", "rdp_curves", "--means", "0.5"},
           {"tune", "/nonexistent.json"},
           {"--format", "xml", "account", "--dist", "point:1"}}) {
    const CliResult r = Invoke(args);
    EXPECT_EQ(r.code, kExitUsage) << ::testing::PrintToString(args);
    EXPECT_THAT(r.err, StartsWith("error: "));
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  }
}

TEST(CliErrorsTest, HelpDocumentsExitCodes) {
  const CliResult r = Invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_THAT(r.out, HasSubstr("1 soundness violation"));
  for (const char* sub : {"account", "utility", "calibrate", "tune", "until-success",
                          "select-demo", "figures", "verify"}) {
    EXPECT_THAT(r.out, HasSubstr(sub));
  }
}

TEST(CliUtilityTest, GeometricQuantile) {
  const CliResult r = Invoke({"utility", "--dist", "geometric:0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["expected_quantile"].get<double>(), 0.613706, 1e-6);
}

TEST(CliCalibrateTest, MeetsBudget) {
  const CliResult r = Invoke({"calibrate", "--family", "geometric", "--epsilon", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["target_met"].get<bool>());
  EXPECT_LE(j["achieved_epsilon"].get<double>(), 5);
  const CliResult tight = Invoke({"calibrate", "--family", "geometric", "--epsilon", "1"});
  EXPECT_EQ(tight.code, kExitUsage);
}

TEST(CliFiguresTest, CsvIsDeterministicAndWellFormed) {
  const std::vector<std::string> args = {"figures", "--figure", "conditional_bounds"};
  const CliResult a = Invoke(args);
  const CliResult b = Invoke(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_THAT(a.out, StartsWith("x,y,series\n"));
  EXPECT_THAT(a.out, HasSubstr("upper_bound"));
  EXPECT_THAT(a.out, HasSubstr("exact_lower"));
}

TEST(CliFiguresTest, AllWritesOneFilePerFigure) {
  const std::string dir =
      (std::filesystem::temp_directory_path() / "repdp_cli_figures").string();
  std::filesystem::remove_all(dir);
  const CliResult r = Invoke({"--out", dir, "figures", "--figure", "all", "--means",
                           "3,30", "--lambda-grid", "2,4,8"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"rdp_curves", "rdp_compare", "adp_vs_mean",
                           "quantile_vs_eps", "beta_vs_eps", "conditional_bounds"}) {
    EXPECT_THAT(ReadFile(dir + "/" + name + ".csv"), StartsWith("x,y,series\n")) << name;
  }
  std::filesystem::remove_all(dir);
  EXPECT_EQ(Invoke({"figures", "--figure", "all"}).code, kExitUsage);
}

TEST(CliSelectDemoTest, SpikeIsFoundOften) {
  const CliResult r =
      Invoke({"--seed", "5", "select-demo", "--jobs", "2000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_GT(j["success_rate"].get<double>(), 0.85);
  EXPECT_NEAR(NumberFromJson(j["epsilon"]).value(), 2.0, 1e-9);
}

TEST(CliVerifyTest, SandwichCorpusPasses) {
  const CliResult r = Invoke({"verify", "--corpus", "prop17", "--lambda-grid", "2,8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_THAT(r.out, StartsWith("instance,distribution,lambda,exact,bound,slack,method\n"));
  EXPECT_THAT(r.out, HasSubstr("sandwich_upper"));
  EXPECT_THAT(r.out, HasSubstr("sandwich_lower"));
}

// A job config pointing at the built toy candidate.
std::string ToyConfig() {
  json config = ReadJsonFile(REPDP_TOY_CONFIG).value();
  for (json& c : config["candidates"]) c["command"][0] = REPDP_TOY_CANDIDATE;
  const std::string path =
      (std::filesystem::temp_directory_path() / "repdp_toy_config.json").string();
  std::ofstream(path) << config.dump(2);
  return path;
}

TEST(CliTuneTest, MatchesGoldenReport) {
  const std::string config = ToyConfig();
  const CliResult r = Invoke({"tune", config});
  ASSERT_EQ(r.code, 0) << r.err;
  if (std::getenv("REPDP_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(REPDP_GOLDEN_TUNE) << r.out;
  }
  EXPECT_EQ(r.out, ReadFile(REPDP_GOLDEN_TUNE));
  const CliResult serial = Invoke({"tune", config, "--workers", "1"});
  EXPECT_EQ(serial.out, r.out);
  const CliResult other = Invoke({"--seed", "8", "tune", config});
  EXPECT_NE(other.out, r.out);
}

TEST(CliTuneTest, UntilSuccessReportsConditionalBound) {
  const CliResult r = Invoke({"until-success", ToyConfig(), "--accept", "-0.01",
                           "--qs-lower", "0.2", "--lambda-grid", "2,4,8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["procedure"], "until_success");
  EXPECT_GE(j["best"]["score"].get<double>(), -0.01);
  EXPECT_FALSE(j["privacy"].contains("distribution"));
  EXPECT_EQ(Invoke({"until-success", ToyConfig(), "--accept", "0", "--qs-lower", "0"}).code,
            kExitUsage);
}

}  // namespace
}  // namespace repdp
