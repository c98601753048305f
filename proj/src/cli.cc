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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "repdp/accountant.h"
#include "repdp/figures.h"
#include "repdp/json_io.h"
#include "repdp/kdist.h"
#include "repdp/oracle.h"
#include "repdp/privacy_curve.h"
#include "repdp/soundness.h"
#include "repdp/status_macros.h"
#include "repdp/tuner.h"
#include "repdp/utility.h"

namespace repdp {
namespace {

using json = nlohmann::json;

constexpr double kViolationTolerance = 1e-9;

// Raised inside a subcommand to leave with a specific exit code.
struct Exit {
  int code;
  std::string kind;
  std::string message;
};

[[noreturn]] void Fail(const absl::Status& status) {
  throw Exit{kExitUsage, absl::AsciiStrToLower(absl::StatusCodeToString(status.code())),
             std::string(status.message())};
}

template <typename T>
T OrFail(absl::StatusOr<T> v) {
  if (!v.ok()) Fail(v.status());
  return *std::move(v);
}

struct Globals {
  std::optional<uint64_t> seed;
  std::string out;
  std::string format;
};

std::vector<double> ParseList(const std::string& text, const char* what) {
  std::vector<double> values;
  for (absl::string_view item : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    auto v = NumberFromJson(json(std::string(absl::StripAsciiWhitespace(item))));
    if (!v.ok()) {
      Fail(absl::InvalidArgumentError(absl::StrCat(what, ": ", v.status().message())));
    }
    values.push_back(*v);
  }
  if (values.empty()) Fail(absl::InvalidArgumentError(absl::StrCat(what, " is empty")));
  return values;
}

std::vector<double> LambdaGrid(const std::string& text) {
  if (text.empty()) return StandardLambdaGrid();
  std::vector<double> grid = ParseList(text, "--lambda-grid");
  for (double l : grid) {
    if (!(l > 1)) Fail(absl::InvalidArgumentError("orders must exceed 1"));
  }
  return grid;
}

void Emit(const Globals& g, const std::string& content, std::ostream& out) {
  if (g.out.empty()) {
    out << content;
    return;
  }
  std::ofstream file(g.out, std::ios::binary);
  if (!file || !(file << content)) {
    Fail(absl::PermissionDeniedError(absl::StrCat("cannot write ", g.out)));
  }
}

std::string Format(const Globals& g, const char* fallback) {
  return g.format.empty() ? fallback : g.format;
}

// ---- account ----

struct AccountArgs {
  std::string base = "zcdp:0.1";
  std::string dist;
  std::string lambdas;
  double delta = 1e-6;
};

void RunAccount(const Globals& g, const AccountArgs& a, std::ostream& out) {
  const PrivacyCurve base = OrFail(ParseCurve(a.base));
  const RepetitionDistribution dist = OrFail(ParseDistribution(a.dist));
  AnalyzeOptions options;
  options.lambdas = LambdaGrid(a.lambdas);
  options.target_delta = a.delta;
  const TuningBound bound = OrFail(Analyze(dist, base, options));
  if (Format(g, "json") == "csv") {
    Emit(g, TuningBoundCsv(bound), out);
  } else {
    Emit(g, TuningBoundToJson(bound).dump(2) + "\n", out);
  }
}

// ---- utility ----

struct UtilityArgs {
  std::string dist;
  double p = 0.01;
};

void RunUtility(const Globals& g, const UtilityArgs& a, std::ostream& out) {
  const RepetitionDistribution dist = OrFail(ParseDistribution(a.dist));
  const UtilitySummary s = OrFail(Summarize(dist, a.p));
  if (Format(g, "json") == "csv") {
    std::string csv = "field,value\n";
    absl::StrAppendFormat(&csv, "expected_quantile,%.17g\n", s.expected_quantile);
    absl::StrAppendFormat(&csv, "per_run_success,%.17g\n", s.per_run_success);
    absl::StrAppendFormat(&csv, "success_probability,%.17g\n", s.success_probability);
    absl::StrAppendFormat(&csv, "expected_repetitions,%.17g\n", s.expected_repetitions);
    for (const auto& [k, bound] : s.tail) {
      absl::StrAppendFormat(&csv, "tail_%d,%.17g\n", k, bound);
    }
    Emit(g, csv, out);
  } else {
    json j = UtilitySummaryToJson(s);
    j["distribution"] = DistributionToJson(dist);
    Emit(g, j.dump(2) + "\n", out);
  }
}

// ---- calibrate ----

struct CalibrateArgs {
  std::string base = "zcdp:0.1";
  std::string family = "poisson";
  double epsilon = 0;
  double delta = 1e-6;
  std::string objective = "max_mean";
  double target = 0;
  double p = 0.01;
  std::string lambdas;
};

CalibrationFamily ParseFamily(const std::string& text) {
  if (text == "poisson") return CalibrationFamily::Poisson();
  if (text == "geometric") return CalibrationFamily::Tnb(1);
  if (text == "logarithmic") return CalibrationFamily::Tnb(0);
  if (absl::StartsWith(text, "tnb:eta=")) {
    return CalibrationFamily::Tnb(
        ParseList(text.substr(8), "--family eta").front());
  }
  Fail(absl::InvalidArgumentError(absl::StrCat(
      "unknown family '", text,
      "' (poisson, geometric, logarithmic, tnb:eta=<eta>)")));
}

void RunCalibrate(const Globals& g, const CalibrateArgs& a, std::ostream& out) {
  const PrivacyCurve base = OrFail(ParseCurve(a.base));
  CalibrationObjective objective;
  objective.per_run_success = a.p;
  objective.target = a.target;
  if (a.objective == "max_mean") {
    objective.kind = CalibrationObjective::Kind::kMaxMean;
  } else if (a.objective == "target_mean") {
    objective.kind = CalibrationObjective::Kind::kTargetMean;
  } else {
    objective.kind = CalibrationObjective::Kind::kTargetSuccess;
  }
  AnalyzeOptions options;
  options.lambdas = LambdaGrid(a.lambdas);
  const CalibrationResult r = OrFail(
      Calibrate(base, ParseFamily(a.family), Budget{a.epsilon, a.delta},
                objective, options));
  const json j = {{"distribution", DistributionToJson(r.distribution)},
                  {"achieved_epsilon", NumberToJson(r.achieved_epsilon)},
                  {"budget", {{"epsilon", a.epsilon}, {"delta", a.delta}}},
                  {"target_met", r.target_met},
                  {"single_run", r.single_run},
                  {"non_monotone", r.non_monotone},
                  {"summary", UtilitySummaryToJson(r.summary)},
                  {"bound", TuningBoundToJson(r.bound)}};
  if (Format(g, "json") == "csv") {
    Emit(g, TuningBoundCsv(r.bound), out);
  } else {
    Emit(g, j.dump(2) + "\n", out);
  }
}

// ---- tune / until-success ----

struct TuneArgs {
  std::string config;
  std::optional<int> workers;
  std::optional<int64_t> k_cap;
  std::optional<double> wall_clock_cap;
};

JobConfig LoadConfig(const std::string& path) {
  const json j = OrFail(ReadJsonFile(path));
  std::string dir = std::filesystem::path(path).parent_path().string();
  if (dir.empty()) dir = ".";
  return OrFail(JobConfigFromJson(j, dir));
}

void RunTune(const Globals& g, const TuneArgs& a, std::ostream& out) {
  JobConfig config = LoadConfig(a.config);
  if (!config.distribution.has_value()) {
    Fail(absl::InvalidArgumentError("job config is missing 'distribution'"));
  }
  if (a.workers) config.options.workers = *a.workers;
  if (a.k_cap) config.options.k_cap = *a.k_cap;
  if (a.wall_clock_cap) config.options.wall_clock_cap_seconds = *a.wall_clock_cap;
  const uint64_t seed = g.seed.value_or(config.seed);
  const TuningJobReport report = OrFail(
      Tune(config.candidates, *config.distribution, config.base, seed,
           config.options));
  Emit(g, ReportToJson(report).dump(2) + "\n", out);
}

struct UntilSuccessArgs {
  std::string config;
  double accept = 0;
  double qs_lower = 0;
  std::string backward;
  int64_t max_attempts = 1000000;
  std::string lambdas;
};

void RunUntilSuccess(const Globals& g, const UntilSuccessArgs& a,
                     std::ostream& out) {
  const JobConfig config = LoadConfig(a.config);
  const PrivacyCurve backward =
      a.backward.empty() ? config.base : OrFail(ParseCurve(a.backward));
  UntilSuccessOptions options;
  options.max_attempts = a.max_attempts;
  options.lambdas = LambdaGrid(a.lambdas);
  const TuningJobReport report = OrFail(TuneUntilSuccess(
      config.candidates, a.accept, config.base, backward, a.qs_lower,
      g.seed.value_or(config.seed), options));
  Emit(g, ReportToJson(report).dump(2) + "\n", out);
}

// ---- select-demo ----

struct SelectArgs {
  std::string utilities;
  double epsilon = 1;
  std::string mechanism = "laplace";
  std::string dist;
  int64_t jobs = 10000;
};

void RunSelect(const Globals& g, const SelectArgs& a, std::ostream& out) {
  std::vector<double> u = {100, 0, 0, 0, 0, 0, 0, 0};
  if (!a.utilities.empty()) u = ParseList(a.utilities, "--utilities");
  const double m = static_cast<double>(u.size());
  SelectionMechanism mechanism = SelectionMechanism::Exponential();
  json dist_json = nullptr;
  if (a.mechanism == "laplace") {
    const RepetitionDistribution dist = OrFail(
        a.dist.empty() ? RepetitionDistribution::Logarithmic(std::pow(m, -10.0))
                       : ParseDistribution(a.dist));
    dist_json = DistributionToJson(dist);
    mechanism = SelectionMechanism::RepeatedLaplace(dist);
  }
  const SelectionReport r =
      OrFail(SelectionDemo(u, a.epsilon, mechanism, g.seed.value_or(0), a.jobs));
  std::vector<int64_t> counts(u.size() + 1, 0);
  for (const SelectionOutcome& o : r.outcomes) {
    ++counts[o.chosen.has_value() ? static_cast<size_t>(*o.chosen) : u.size()];
  }
  json chosen = json::array();
  for (size_t j = 0; j < u.size(); ++j) chosen.push_back(counts[j]);
  const json j = {{"mechanism", a.mechanism},
                  {"distribution", dist_json},
                  {"utilities", u},
                  {"jobs", a.jobs},
                  {"epsilon", NumberToJson(r.epsilon)},
                  {"exponential_epsilon", r.exponential_epsilon},
                  {"success_rate", r.success_rate},
                  {"chosen_counts", chosen},
                  {"no_output", counts.back()}};
  Emit(g, j.dump(2) + "\n", out);
}

// ---- figures ----

struct FigureArgs {
  std::string figure;
  std::string base = "zcdp:0.1";
  std::vector<std::string> families;
  std::string means;
  double delta = 1e-6;
  std::string lambdas;
  double p = 0.01;
  double rate = 0.1;
  double a = 0.01;
};

std::string FigureText(const Globals& g, const std::vector<FigureRow>& rows) {
  if (Format(g, "csv") == "csv") return FigureCsv(rows);
  json j = json::array();
  for (const FigureRow& r : rows) {
    j.push_back({{"x", NumberToJson(r.x)}, {"y", NumberToJson(r.y)}, {"series", r.series}});
  }
  return j.dump(2) + "\n";
}

void RunFigures(const Globals& g, const FigureArgs& a, std::ostream& out) {
  std::vector<std::string> names = {a.figure};
  if (a.figure == "all") {
    if (g.out.empty()) {
      Fail(absl::InvalidArgumentError("--figure all needs --out <directory>"));
    }
    names = FigureNames();
  }
  // Validate every request before computing anything.
  std::vector<FigureRequest> requests;
  for (const std::string& name : names) {
    FigureRequest request;
    request.figure = name;
    request.base = OrFail(ParseCurve(a.base));
    request.families = a.families;
    if (!a.means.empty()) request.means = ParseList(a.means, "--means");
    request.delta = a.delta;
    if (!a.lambdas.empty()) request.lambdas = LambdaGrid(a.lambdas);
    request.per_run_success = a.p;
    request.rate = a.rate;
    request.a = a.a;
    requests.push_back(OrFail(WithDefaults(request)));
  }
  if (a.figure != "all") {
    Emit(g, FigureText(g, OrFail(ComputeFigure(requests[0]))), out);
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(g.out, ec);
  for (const FigureRequest& request : requests) {
    Globals file = g;
    file.out = (std::filesystem::path(g.out) /
                absl::StrCat(request.figure, ".", Format(g, "csv")))
                   .string();
    Emit(file, FigureText(g, OrFail(ComputeFigure(request))), out);
  }
}

// ---- verify ----

struct VerifyArgs {
  std::string corpus = "full";
  int workers = 1;
  std::string lambdas;
};

int RunVerify(const Globals& g, const VerifyArgs& a, std::ostream& out,
              std::ostream& err) {
  SoundnessOptions options;
  options.workers = a.workers;
  if (!a.lambdas.empty()) options.lambdas = LambdaGrid(a.lambdas);
  std::vector<SoundnessRow> rows;
  if (a.corpus == "full") {
    rows = OrFail(RunSoundnessMatrix(OracleCorpus(), SoundnessDistributions(), options));
  } else {
    // Randomized-response pairs only, plus the fixed-k sandwich.
    std::vector<NamedPair> rr;
    for (const NamedPair& p : OracleCorpus()) {
      if (absl::StartsWith(p.name, "rr(")) rr.push_back(p);
    }
    rows = OrFail(RunSoundnessMatrix(rr, SoundnessDistributions(), options));
    std::vector<double> lambdas = options.lambdas;
    lambdas.push_back(kInfiniteOrder);
    const std::vector<SoundnessRow> sandwich = SandwichToSoundness(OrFail(
        PointMassSandwich({0.5, 1, 2}, {1, 2, 3, 5, 10}, lambdas)));
    rows.insert(rows.end(), sandwich.begin(), sandwich.end());
  }
  int violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const SoundnessRow& r : rows) {
    worst = std::min(worst, r.slack);
    if (!(r.slack >= -kViolationTolerance)) ++violations;
  }
  if (Format(g, "csv") == "csv") {
    Emit(g, SoundnessCsv(rows), out);
  } else {
    json j = json::array();
    for (const SoundnessRow& r : rows) {
      j.push_back({{"instance", r.instance}, {"distribution", r.distribution},
                   {"lambda", NumberToJson(r.lambda)}, {"exact", NumberToJson(r.exact)},
                   {"bound", NumberToJson(r.bound)}, {"slack", NumberToJson(r.slack)},
                   {"method", r.method}});
    }
    Emit(g, j.dump(2) + "\n", out);
  }
  if (violations > 0) {
    err << absl::StrFormat(
               "error: soundness_violation: %d of %d rows have slack below "
               "-%g (min slack %.6g)",
               violations, rows.size(), kViolationTolerance, worst)
        << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Privacy accounting and tuning for hyperparameter search with "
               "a random number of repetitions."};
  app.name("repdp");
  app.footer(
      "Exit codes: 0 ok, 1 soundness violation, 2 usage or validation error "
      "(one line 'error: <kind>: <message>' on stderr).");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  uint64_t seed = 0;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "Master seed (overrides a job config)");
  app.add_option("--out", g.out, "Write output to this file (figures --figure all: directory)");
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  AccountArgs account;
  CLI::App* account_cmd =
      app.add_subcommand("account", "Privacy bound for a repetition law");
  account_cmd->add_option("--base", account.base,
                          "Base guarantee: pure:eps, zcdp:rho, approx:eps,delta, "
                          "rdp:l=e;..., optional ,delta0=x, or JSON")
      ->capture_default_str();
  account_cmd->add_option("--dist", account.dist,
                          "Repetition law: point:k, tnb:eta=..,gamma=..|mean=.., "
                          "geometric:.., logarithmic:.., poisson:mu, optional "
                          ",limit=m, or JSON")
      ->required();
  account_cmd->add_option("--lambda-grid", account.lambdas,
                          "Comma-separated orders (inf allowed); default: standard grid");
  account_cmd->add_option("--delta", account.delta, "Target delta")->capture_default_str();

  UtilityArgs utility;
  CLI::App* utility_cmd =
      app.add_subcommand("utility", "Expected quantile and success probability");
  utility_cmd->add_option("--dist", utility.dist, "Repetition law")->required();
  utility_cmd->add_option("--p", utility.p, "Per-run success probability")
      ->capture_default_str();

  CalibrateArgs calibrate;
  CLI::App* calibrate_cmd = app.add_subcommand(
      "calibrate", "Largest law in a family that fits an (eps, delta) budget");
  calibrate_cmd->add_option("--base", calibrate.base, "Base guarantee")->capture_default_str();
  calibrate_cmd->add_option("--family", calibrate.family,
                            "poisson, geometric, logarithmic or tnb:eta=<eta>")
      ->capture_default_str();
  calibrate_cmd->add_option("--epsilon", calibrate.epsilon, "Budget epsilon")->required();
  calibrate_cmd->add_option("--delta", calibrate.delta, "Budget delta")->capture_default_str();
  calibrate_cmd->add_option("--objective", calibrate.objective, "Objective")
      ->check(CLI::IsMember({"max_mean", "target_mean", "target_success"}))
      ->capture_default_str();
  calibrate_cmd->add_option("--target", calibrate.target, "Target mean or success probability");
  calibrate_cmd->add_option("--p", calibrate.p, "Per-run success probability")
      ->capture_default_str();
  calibrate_cmd->add_option("--lambda-grid", calibrate.lambdas, "Comma-separated orders");

  TuneArgs tune;
  CLI::App* tune_cmd =
      app.add_subcommand("tune", "Run a random-repetition tuning job");
  tune_cmd->add_option("config", tune.config, "Job config (JSON)")->required();
  tune_cmd->add_option("--workers", tune.workers, "Parallel runs");
  tune_cmd->add_option("--k-cap", tune.k_cap, "Truncate K at this value");
  tune_cmd->add_option("--wall-clock-cap", tune.wall_clock_cap,
                       "Abort after this many seconds");

  UntilSuccessArgs until;
  CLI::App* until_cmd = app.add_subcommand(
      "until-success", "Run candidates until one reaches a threshold");
  until_cmd->add_option("config", until.config, "Job config (JSON)")->required();
  until_cmd->add_option("--accept", until.accept, "Acceptance threshold on the score")
      ->required();
  until_cmd->add_option("--qs-lower", until.qs_lower,
                        "Lower bound on the per-run acceptance probability, in (0, 1]")
      ->required();
  until_cmd->add_option("--backward", until.backward,
                        "Guarantee in the reverse direction (default: the config base)");
  until_cmd->add_option("--max-attempts", until.max_attempts, "Attempt limit")
      ->capture_default_str();
  until_cmd->add_option("--lambda-grid", until.lambdas, "Comma-separated orders");

  SelectArgs select;
  CLI::App* select_cmd = app.add_subcommand(
      "select-demo", "Private selection: repeated Laplace vs exponential mechanism");
  select_cmd->add_option("--utilities", select.utilities,
                         "Comma-separated utilities (default: 100,0,0,0,0,0,0,0)");
  select_cmd->add_option("--epsilon", select.epsilon, "Per-run epsilon")->capture_default_str();
  select_cmd->add_option("--mechanism", select.mechanism, "Mechanism")
      ->check(CLI::IsMember({"laplace", "exponential"}))
      ->capture_default_str();
  select_cmd->add_option("--dist", select.dist,
                         "Repetition law (default: logarithmic with gamma = m^-10)");
  select_cmd->add_option("--jobs", select.jobs, "Independent jobs")->capture_default_str();

  FigureArgs figure;
  CLI::App* figures_cmd =
      app.add_subcommand("figures", "CSV series (x, y, series) for the analytic plots");
  std::vector<std::string> figure_choices = FigureNames();
  figure_choices.push_back("all");
  figures_cmd->add_option("--figure", figure.figure, "Figure name or all")
      ->check(CLI::IsMember(figure_choices))
      ->required();
  figures_cmd->add_option("--base", figure.base, "Base guarantee")->capture_default_str();
  figures_cmd->add_option("--families", figure.families,
                          "Families separated by ';' (logarithmic, geometric, "
                          "tnb:eta=<eta>, poisson, composition)")
      ->delimiter(';');
  figures_cmd->add_option("--means", figure.means, "Comma-separated expected repetitions");
  figures_cmd->add_option("--delta", figure.delta, "Target delta")->capture_default_str();
  figures_cmd->add_option("--lambda-grid", figure.lambdas, "Comma-separated orders");
  figures_cmd->add_option("--p", figure.p, "Per-run success probability")
      ->capture_default_str();
  figures_cmd->add_option("--rate", figure.rate,
                          "conditional_bounds: divergence per unit order")
      ->capture_default_str();
  figures_cmd->add_option("--a", figure.a, "conditional_bounds: mass parameter a")
      ->capture_default_str();

  VerifyArgs verify;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "Exact oracle against every bound; exit 1 on any violation");
  verify_cmd->add_option("--corpus", verify.corpus,
                         "full, or sandwich (randomized response plus fixed-k "
                         "lower/upper rows)")
      ->transform(CLI::IsMember(std::map<std::string, std::string>{
          {"full", "full"}, {"sandwich", "sandwich"}, {"prop17", "sandwich"}}))
      ->capture_default_str();
  verify_cmd->add_option("--workers", verify.workers, "Threads")->capture_default_str();
  verify_cmd->add_option("--lambda-grid", verify.lambdas, "Comma-separated orders");

  std::vector<const char*> argv = {"repdp"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // Subcommand help.
      for (CLI::App* sub : app.get_subcommands()) out << sub->help();
      return kExitOk;
    }
    std::string message = absl::StrReplaceAll(e.what(), {{"\n", " "}});
    err << "error: usage: " << message << "\n";
    return kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (account_cmd->parsed()) RunAccount(g, account, out);
    if (utility_cmd->parsed()) RunUtility(g, utility, out);
    if (calibrate_cmd->parsed()) RunCalibrate(g, calibrate, out);
    if (tune_cmd->parsed()) RunTune(g, tune, out);
    if (until_cmd->parsed()) RunUntilSuccess(g, until, out);
    if (select_cmd->parsed()) RunSelect(g, select, out);
    if (figures_cmd->parsed()) RunFigures(g, figure, out);
    if (verify_cmd->parsed()) return RunVerify(g, verify, out, err);
  } catch (const Exit& e) {
    err << "error: " << e.kind << ": "
        << absl::StrReplaceAll(e.message, {{"\n", " "}}) << "\n";
    return e.code;
  }
  return kExitOk;
}

}  // namespace repdp
