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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if
// every line passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "repdp/accountant.h"
#include "repdp/cli.h"
#include "repdp/figures.h"
#include "repdp/json_io.h"
#include "repdp/kdist.h"
#include "repdp/oracle.h"
#include "repdp/rng.h"
#include "repdp/soundness.h"
#include "repdp/tuner.h"
#include "repdp/utility.h"

namespace repdp {
namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;
};

int Workers() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void Check(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    absl::StrAppend(&o.detail, o.detail.empty() ? "" : "; ", "FAILED ", what);
  }
}

void Note(Outcome& o, const std::string& what) {
  absl::StrAppend(&o.detail, o.detail.empty() ? "" : "; ", what);
}

// 1. Pure-DP geometric and logarithmic repetition through the CLI.
Outcome PureRecovery() {
  Outcome o;
  for (auto [eta, expected] : {std::pair{"1", 3.0}, std::pair{"0", 2.0}}) {
    std::ostringstream out, err;
    const int code = RunCli({"account", "--base", "pure:1", "--dist",
                             absl::StrCat("tnb:eta=", eta, ",gamma=0.5")},
                            out, err);
    if (code != 0) {
      Check(o, false, absl::StrCat("eta=", eta, " exit ", code, " ", err.str()));
      continue;
    }
    const json j = json::parse(out.str());
    const json& last = j["points"].back();
    const double eps = NumberFromJson(last["epsilon"]).value_or(-1);
    const bool at_inf = std::isinf(NumberFromJson(last["lambda"]).value_or(0));
    Note(o, absl::StrFormat("eta=%s -> %.6f at lambda=inf", eta, eps));
    Check(o, at_inf && std::abs(eps - expected) <= 1e-6,
          absl::StrFormat("eta=%s expected %.3f", eta, expected));
  }
  return o;
}

// 2. Exact oracle vs every bound over the full matrix.
Outcome SoundnessMatrix() {
  Outcome o;
  const std::vector<NamedPair> corpus = OracleCorpus();
  SoundnessOptions options;
  options.workers = Workers();
  auto rows = RunSoundnessMatrix(corpus, SoundnessDistributions(), options);
  if (!rows.ok()) {
    Check(o, false, std::string(rows.status().message()));
    return o;
  }
  double worst = kInf;
  std::string where;
  for (const SoundnessRow& r : *rows) {
    if (r.slack < worst) {
      worst = r.slack;
      where = absl::StrCat(r.instance, " ", r.distribution, " lambda=", r.lambda);
    }
  }
  Note(o, absl::StrFormat("%d pairs, %d rows, min slack %.3g (%s)", corpus.size(),
                          rows->size(), worst, where));
  Check(o, corpus.size() >= 40, "corpus has fewer than 40 pairs");
  Check(o, worst >= -1e-9, "negative slack");
  return o;
}

// 3. Fixed-k repetition of randomized response is bracketed.
Outcome Sandwich() {
  Outcome o;
  auto rows = PointMassSandwich({0.5, 1, 2}, {1, 2, 3, 5, 10}, StandardLambdaGrid());
  if (!rows.ok()) {
    Check(o, false, std::string(rows.status().message()));
    return o;
  }
  int bad = 0;
  double inf_err = 0;
  for (const SandwichRow& r : *rows) {
    const double tol = 1e-12 * std::max(1.0, std::abs(r.exact));
    if (r.lower > r.exact + tol || r.exact > r.upper + tol) ++bad;
    if (std::isinf(r.lambda)) {
      inf_err = std::max(inf_err, std::abs(r.exact - r.k * r.epsilon));
    }
  }
  Note(o, absl::StrFormat("%d rows, %d outside [lower, upper], max |exact - k eps| "
                          "at inf %.2g",
                          rows->size(), bad, inf_err));
  Check(o, bad == 0, "sandwich violated");
  Check(o, inf_err <= 1e-9, "exact at inf differs from k eps");
  return o;
}

// 4. Closed-form repeated-max law against brute-force enumeration of K.
Outcome OracleSelfCheck() {
  Outcome o;
  double max_diff = 0, max_residual = 0;
  int cases = 0;
  std::vector<std::vector<double>> qs;
  std::vector<std::string> names;
  for (const NamedPair& np : OracleCorpus()) {
    qs.push_back(np.pair.p());
    qs.push_back(np.pair.p_prime());
    names.push_back(np.name);
    names.push_back(np.name + "'");
  }
  for (const RepetitionDistribution& dist : SoundnessDistributions()) {
    auto brute = BruteForceRepeatedMax(qs, dist);
    if (!brute.ok()) {
      Check(o, false, dist.ToString());
      continue;
    }
    for (size_t j = 0; j < qs.size(); ++j) {
      auto law = RepeatedMaxDistribution(qs[j], dist);
      const BruteForceResult& b = (*brute)[j];
      if (!law.ok() || law->size() != b.law.size()) {
        Check(o, false, absl::StrCat(names[j], " ", dist.ToString()));
        continue;
      }
      for (size_t i = 0; i < law->size(); ++i) {
        max_diff = std::max(max_diff, std::abs((*law)[i] - b.law[i]));
      }
      max_residual = std::max(max_residual, b.residual);
      ++cases;
    }
  }
  Note(o, absl::StrFormat("%d laws, max |diff| %.2g, max residual %.2g", cases,
                          max_diff, max_residual));
  Check(o, max_diff <= 1e-9, "law mismatch");
  Check(o, max_residual < 1e-12, "residual too large");
  return o;
}

// 5. Expected quantile: quadrature, series, Monte Carlo and a closed form.
Outcome Utility() {
  Outcome o;
  double max_diff = 0;
  for (const RepetitionDistribution& dist : SoundnessDistributions()) {
    auto quad = ExpectedQuantile(dist);
    auto series = ExpectedQuantileSeries(dist);
    if (!quad.ok() || !series.ok()) {
      Check(o, false, dist.ToString());
      continue;
    }
    max_diff = std::max(max_diff, std::abs(*quad - *series));
  }
  Note(o, absl::StrFormat("quadrature vs series max |diff| %.2g", max_diff));
  Check(o, max_diff <= 1e-8, "quadrature vs series");

  // Best of K uniform quantiles is U^(1/K).
  constexpr int kTrials = 1000000;
  double mc_worst = 0;
  const std::vector<RepetitionDistribution> mc = {
      RepetitionDistribution::Geometric(0.5).value(),
      RepetitionDistribution::Logarithmic(TnbGammaForMean(0, 10).value()).value(),
      RepetitionDistribution::Poisson(10).value(),
      RepetitionDistribution::TruncatedNegativeBinomial(0.5, 0.1).value()};
  for (size_t d = 0; d < mc.size(); ++d) {
    Rng rng(DeriveSeed(5, d));
    RepetitionSampler sampler(mc[d]);
    double total = 0;
    for (int t = 0; t < kTrials; ++t) {
      const int64_t k = sampler.Sample(rng);
      const double u = rng.Uniform01();
      if (k > 0) total += std::pow(u, 1.0 / static_cast<double>(k));
    }
    mc_worst = std::max(mc_worst, std::abs(total / kTrials - *ExpectedQuantile(mc[d])));
  }
  Note(o, absl::StrFormat("Monte Carlo (1e6, seeded) max |diff| %.2g", mc_worst));
  Check(o, mc_worst <= 1e-3, "Monte Carlo");

  const double geo = ExpectedQuantile(RepetitionDistribution::Geometric(0.5).value()).value();
  const double closed = 2 - 2 * std::log(2.0);
  Note(o, absl::StrFormat("Geometric(0.5) %.9f, closed form %.9f", geo, closed));
  Check(o, std::abs(geo - 0.613706) <= 1e-6 && std::abs(geo - closed) <= 1e-10,
        "Geometric(0.5)");
  return o;
}

// 6. Conditional sampling worst case at rate 0.1 lambda.
Outcome ConditionalEnvelope() {
  Outcome o;
  double max_residual = 0;
  for (double lambda : {2.0, 4.0, 8.0, 16.0, 32.0}) {
    auto sol = SolveFigure8(lambda, 0.1 * lambda, 0.01);
    if (!sol.ok()) {
      Check(o, false, absl::StrCat("solve at ", lambda));
      continue;
    }
    max_residual = std::max(max_residual, sol->residual);
    const ConditionalInstance inst = WorstCaseConditional(sol->s, sol->t, 0.01).value();
    const FiniteMechanismPair& pair = inst.pair;
    const double exact = RenyiDivergence(inst.conditioned.pair.p(),
                                         inst.conditioned.pair.p_prime(), lambda);
    const double lower = ConditionalLowerBound(sol->s, sol->t, lambda);
    auto upper = ConditionalBound(
        [&](double l) { return RenyiDivergence(pair.p(), pair.p_prime(), l); },
        [&](double l) { return RenyiDivergence(pair.p_prime(), pair.p(), l); },
        inst.conditioned.qs, lambda, ConditionalSpec::Preset(2));
    if (!upper.ok()) {
      Check(o, false, absl::StrCat("upper at ", lambda));
      continue;
    }
    Note(o, absl::StrFormat("l=%g: %.4f <= %.4f <= %.4f", lambda, lower, exact,
                            upper->epsilon));
    Check(o, lower <= exact && exact <= upper->epsilon,
          absl::StrCat("envelope at ", lambda));
  }
  Note(o, absl::StrFormat("max residual %.2g", max_residual));
  Check(o, max_residual < 1e-8, "residual");
  return o;
}

// 7. Poisson repetition of an (eps0, delta0)-DP algorithm.
Outcome ApproxPoissonSpot() {
  Outcome o;
  const ApproxPoissonResult r = ApproxPoisson(0.1, 1e-6, 10);
  Note(o, absl::StrFormat("eps'=%.10f (closed form %.10f, reference 0.342171), "
                          "delta'=%.6g",
                          r.epsilon, 0.1 + std::expm1(0.1) * std::log(10.0), r.delta));
  Check(o, std::abs(r.epsilon - 0.342171) <= 1e-6, "eps' within 1e-6 of 0.342171");
  Check(o, std::abs(r.delta - 1e-5) <= 1e-9, "delta'");
  const ApproxPoissonResult exact = ApproxPoisson(0.1, 0, 10);
  const double direct = BoundPoisson(0.1, 0.1, 0, 10, 1 + 1 / std::expm1(0.1)).value();
  Check(o, exact.epsilon == direct && exact.delta == 0, "delta0=0 path not bit-identical");
  return o;
}

// 8. Tuner replay, uniform candidate choice and until-success attempts.
std::vector<CandidateSpec> Candidates(int m) {
  std::vector<CandidateSpec> out(m);
  for (int i = 0; i < m; ++i) {
    out[i].id = absl::StrCat("c", i);
    out[i].hyperparameters = {{"i", i}};
    out[i].callable = [i](const RunContext& ctx) -> absl::StatusOr<TrialOutcome> {
      Rng rng(ctx.seed);
      return TrialOutcome{rng.Uniform01() - 0.1 * i, absl::StrCat("run", ctx.run_index)};
    };
  }
  return out;
}

Outcome Tuner() {
  Outcome o;
  const PrivacyCurve base = PrivacyCurve::ZCdp(0.1).value();
  const RepetitionDistribution dist =
      RepetitionDistribution::TruncatedNegativeBinomial(1, TnbGammaForMean(1, 50).value())
          .value();
  bool identical = true;
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    TuneOptions one, four;
    one.workers = 1;
    four.workers = 4;
    const std::string a = ReportToJson(Tune(Candidates(6), dist, base, seed, one).value()).dump();
    const std::string b = ReportToJson(Tune(Candidates(6), dist, base, seed, four).value()).dump();
    identical = identical && a == b;
  }
  Note(o, absl::StrCat("replay workers 1 vs 4 ", identical ? "identical" : "DIFFERENT"));
  Check(o, identical, "replay");

  constexpr int kRuns = 100000, kM = 7;
  TuneOptions options;
  options.workers = Workers();
  options.analyze.lambdas = {2};
  const TuningJobReport big =
      Tune(Candidates(kM), RepetitionDistribution::PointMass(kRuns).value(), base, 9,
           options)
          .value();
  std::map<std::string, int> counts;
  for (const TrialResult& t : big.trials) ++counts[t.candidate_id];
  const double mean = static_cast<double>(kRuns) / kM;
  const double sd = std::sqrt(kRuns * (1.0 / kM) * (1 - 1.0 / kM));
  double max_z = 0;
  for (const auto& [id, n] : counts) max_z = std::max(max_z, std::abs(n - mean) / sd);
  Note(o, absl::StrFormat("%d candidates over 1e5 runs, max |z| %.2f", kM, max_z));
  Check(o, counts.size() == kM && max_z < 3, "uniformity");

  // One candidate whose score is uniform; accept >= 0.5, so Q(S) = 1/2.
  constexpr int kJobs = 10000;
  UntilSuccessOptions us;
  us.lambdas = {2};
  std::map<int64_t, int> attempts;
  for (int job = 0; job < kJobs; ++job) {
    const TuningJobReport r =
        TuneUntilSuccess(Candidates(1), 0.5, base, base, 0.5, DeriveSeed(17, job), us)
            .value();
    ++attempts[r.k_drawn];
  }
  double tv = 0, covered = 0;
  for (const auto& [k, n] : attempts) {
    const double p = std::pow(0.5, static_cast<double>(k));
    tv += std::abs(static_cast<double>(n) / kJobs - p);
    covered += p;
  }
  tv = (tv + (1 - covered)) / 2;
  Note(o, absl::StrFormat("until-success TV to Geometric(0.5) %.4f", tv));
  Check(o, tv < 0.02, "until-success attempts");
  return o;
}

// 9. Logarithmic repetition curves vs base and k-fold composition.
Outcome RdpOrdering() {
  Outcome o;
  FigureRequest request;
  request.figure = "rdp_curves";
  request.base = PrivacyCurve::ZCdp(0.1).value();
  request.families = {"logarithmic"};
  request.means = {2, 10, 100};
  auto rows = ComputeFigure(request);
  if (!rows.ok()) {
    Check(o, false, std::string(rows.status().message()));
    return o;
  }
  std::map<std::string, std::map<double, double>> s;
  for (const FigureRow& r : *rows) s[r.series][r.x] = r.y;
  for (int mean : {2, 10, 100}) {
    const auto& curve = s[absl::StrCat("logarithmic_mean=", mean)];
    const auto& composed = s[absl::StrCat("composition_k=", mean)];
    int checked = 0, below_base = 0, above_comp = 0;
    double first_bad = 0, last_bad = 0;
    for (const auto& [lambda, eps] : curve) {
      if (lambda < 2) continue;
      ++checked;
      if (!(eps > s["base"][lambda])) ++below_base;
      if (!(eps < composed.at(lambda))) {
        if (above_comp++ == 0) first_bad = lambda;
        last_bad = lambda;
      }
    }
    if (below_base + above_comp == 0) {
      Note(o, absl::StrFormat("mean %d: strict on %d orders", mean, checked));
    } else {
      Note(o, absl::StrFormat("mean %d: %d/%d orders not below composition "
                              "(lambda %.3g..%.3g), %d not above base",
                              mean, above_comp, checked, first_bad, last_bad,
                              below_base));
    }
    Check(o, below_base + above_comp == 0, absl::StrCat("ordering at mean ", mean));
  }
  return o;
}

// 10. Repeated Laplace private selection finds a near-maximal candidate.
Outcome Selection() {
  Outcome o;
  std::vector<double> u(8, 0.0);
  u[3] = 100;
  const RepetitionDistribution dist =
      RepetitionDistribution::Logarithmic(std::pow(8.0, -10.0)).value();
  auto r = SelectionDemo(u, 1.0, SelectionMechanism::RepeatedLaplace(dist), 2024, 10000);
  if (!r.ok()) {
    Check(o, false, std::string(r.status().message()));
    return o;
  }
  Note(o, absl::StrFormat("success rate %.4f over 1e4 jobs (guarantee eps %.3g)",
                          r->success_rate, r->epsilon));
  Check(o, r->success_rate >= 0.85, "success rate below 0.85");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "pure_dp_recovery", 1, PureRecovery},
      {2, "soundness_matrix", 120, SoundnessMatrix},
      {3, "fixed_k_sandwich", 5, Sandwich},
      {4, "oracle_self_check", 30, OracleSelfCheck},
      {5, "utility_formulas", 60, Utility},
      {6, "conditional_envelope", 10, ConditionalEnvelope},
      {7, "approx_dp_poisson", 1, ApproxPoissonSpot},
      {8, "tuner_determinism", 120, Tuner},
      {9, "rdp_ordering", 5, RdpOrdering},
      {10, "selection_demo", 30, Selection},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = c.run();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= c.limit_seconds) {
      Check(o, false, absl::StrFormat("runtime %.2fs >= %gs", seconds, c.limit_seconds));
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2d %-22s %7.2fs (limit %gs)  %s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name, seconds, c.limit_seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace repdp

int main() { return repdp::Main(); }
