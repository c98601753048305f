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

#include <stdlib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <set>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"
#include "repdp/numeric.h"
#include "repdp/rng.h"
#include "repdp/status_macros.h"
#include "repdp/subprocess.h"

namespace repdp {
namespace {

constexpr double kInf = kInfiniteOrder;

// Stream 0 of the master seed draws K; run i uses stream i + 1.
constexpr uint64_t kCountStream = 0;

// Above this K the selection demo draws the best of K exactly instead of
// looping over the runs.
constexpr int64_t kSelectionLoopLimit = 1024;

struct Assignment {
  size_t candidate = 0;
  uint64_t seed = 0;
};

Assignment AssignRun(uint64_t master_seed, int64_t run_index, size_t m) {
  Rng rng(DeriveSeed(master_seed, static_cast<uint64_t>(run_index) + 1));
  Assignment a;
  a.candidate = static_cast<size_t>(rng.UniformIndex(m));
  // 53 bits, so the seed survives a round trip through JSON numbers.
  a.seed = rng.NextU64() >> 11;
  return a;
}

absl::Status ValidateCandidates(const std::vector<CandidateSpec>& candidates) {
  if (candidates.empty()) {
    return absl::InvalidArgumentError("at least one candidate is required");
  }
  std::set<std::string> ids;
  for (const CandidateSpec& c : candidates) {
    if (!ids.insert(c.id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate candidate id: ", c.id));
    }
    if (c.callable == nullptr && c.command.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("candidate ", c.id, " has neither command nor callable"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<TrialOutcome> RunCommand(const CandidateSpec& candidate,
                                        const RunContext& ctx,
                                        std::optional<double> timeout) {
  std::string dir_template =
      (std::filesystem::temp_directory_path() / "repdp-run-XXXXXX").string();
  if (mkdtemp(dir_template.data()) == nullptr) {
    return absl::InternalError("cannot create a run directory");
  }
  const std::string dir = dir_template;
  std::vector<std::string> argv;
  for (const std::string& arg : candidate.command) {
    argv.push_back(absl::StrReplaceAll(
        arg, {{"{seed}", absl::StrCat(ctx.seed)},
              {"{run_index}", absl::StrCat(ctx.run_index)},
              {"{candidate}", ctx.candidate_id}}));
  }
  const nlohmann::json input = {{"hyperparameters", ctx.hyperparameters},
                                {"seed", ctx.seed},
                                {"run_index", ctx.run_index}};
  auto result = RunSubprocess(argv, input.dump(), dir, timeout);
  std::error_code ignored;
  std::filesystem::remove_all(dir, ignored);
  if (!result.ok()) return result.status();
  if (result->timed_out) return absl::DeadlineExceededError("run timed out");
  if (result->exit_code != 0) {
    return absl::InternalError(
        absl::StrCat("candidate exited with status ", result->exit_code));
  }
  nlohmann::json output =
      nlohmann::json::parse(result->stdout_data, nullptr, false);
  if (output.is_discarded() || !output.is_object() ||
      !output.contains("score") || !output["score"].is_number()) {
    return absl::InvalidArgumentError(
        "candidate output is not a JSON object with a numeric score");
  }
  TrialOutcome outcome;
  outcome.score = output["score"].get<double>();
  if (output.contains("payload")) {
    if (!output["payload"].is_string()) {
      return absl::InvalidArgumentError("payload must be a string");
    }
    outcome.payload = output["payload"].get<std::string>();
  }
  return outcome;
}

TrialResult RunTrial(const CandidateSpec& candidate, int64_t run_index,
                     uint64_t seed, std::optional<double> timeout) {
  TrialResult trial;
  trial.run_index = run_index;
  trial.candidate_id = candidate.id;
  trial.seed_used = seed;
  RunContext ctx{run_index, candidate.id, candidate.hyperparameters, seed};
  const auto start = std::chrono::steady_clock::now();
  absl::StatusOr<TrialOutcome> outcome;
  try {
    outcome = candidate.callable != nullptr
                  ? candidate.callable(ctx)
                  : RunCommand(candidate, ctx, timeout);
  } catch (const std::exception& e) {
    outcome = absl::InternalError(absl::StrCat("exception: ", e.what()));
  }
  trial.duration_seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
  if (!outcome.ok()) {
    trial.error = std::string(outcome.status().message());
  } else if (!std::isfinite(outcome->score)) {
    trial.error = "non-finite score";
  } else {
    trial.score = outcome->score;
    trial.payload = std::move(outcome->payload);
  }
  return trial;
}

// Laplace(scale) quantile at cdf value F, with 1 - F passed separately for
// accuracy in the upper tail.
double LaplaceQuantile(double f, double upper, double scale) {
  if (f >= 0.5) return -scale * std::log(2 * upper);
  return scale * std::log(2 * f);
}

}  // namespace

std::optional<size_t> SelectBest(const std::vector<TrialResult>& trials) {
  std::optional<size_t> best;
  for (size_t i = 0; i < trials.size(); ++i) {
    if (!best.has_value()) {
      best = i;
      continue;
    }
    const TrialResult& a = trials[i];
    const TrialResult& b = trials[*best];
    if (!a.score.has_value()) continue;
    if (!b.score.has_value() || *a.score > *b.score ||
        (*a.score == *b.score && a.run_index < b.run_index)) {
      best = i;
    }
  }
  return best;
}

absl::StatusOr<TuningJobReport> Tune(const std::vector<CandidateSpec>& candidates,
                                     const RepetitionDistribution& dist,
                                     const PrivacyCurve& base, uint64_t seed,
                                     const TuneOptions& options) {
  RETURN_IF_ERROR(ValidateCandidates(candidates));
  RepetitionDistribution executed = dist;
  if (options.k_cap.has_value()) {
    ASSIGN_OR_RETURN(executed,
                     RepetitionDistribution::Truncated(dist, *options.k_cap));
  }
  // The bound is settled before anything runs.
  ASSIGN_OR_RETURN(TuningBound privacy,
                   Analyze(executed, base, options.analyze));

  TuningJobReport report;
  report.procedure = "random_repetition";
  report.master_seed = seed;
  report.distribution = executed;
  Rng count_rng(DeriveSeed(seed, kCountStream));
  report.k_drawn = Sample(executed, count_rng);
  const int64_t k = report.k_drawn;
  report.trials.resize(static_cast<size_t>(k));

  std::atomic<int64_t> next{0};
  std::atomic<bool> aborted{false};
  const auto start = std::chrono::steady_clock::now();
  auto worker = [&] {
    for (;;) {
      const int64_t i = next.fetch_add(1);
      if (i >= k) return;
      const Assignment a = AssignRun(seed, i, candidates.size());
      std::optional<double> timeout;
      if (options.wall_clock_cap_seconds.has_value()) {
        const double left =
            *options.wall_clock_cap_seconds -
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        if (left <= 0 || aborted.load()) {
          aborted = true;
          TrialResult& t = report.trials[i];
          t.run_index = i;
          t.candidate_id = candidates[a.candidate].id;
          t.seed_used = a.seed;
          t.error = "not run: wall-clock cap reached";
          continue;
        }
        timeout = left;
      }
      report.trials[i] = RunTrial(candidates[a.candidate], i, a.seed, timeout);
      if (report.trials[i].error == "run timed out") aborted = true;
    }
  };
  const int threads = static_cast<int>(
      std::clamp<int64_t>(options.workers, 1, std::max<int64_t>(1, k)));
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  if (aborted.load()) {
    report.aborted = true;
    report.note =
        "wall-clock cap reached: the job was cut short, so no output and no "
        "privacy bound are reported";
    return report;
  }
  report.privacy = std::move(privacy);
  if (k == 0) {
    report.note = "K = 0: no run executed; the output is the no-output sentinel";
    return report;
  }
  const std::optional<size_t> best = SelectBest(report.trials);
  if (best.has_value()) report.best = report.trials[*best];
  return report;
}

absl::StatusOr<TuningJobReport> TuneUntilSuccess(
    const std::vector<CandidateSpec>& candidates, double accept,
    const PrivacyCurve& forward, const PrivacyCurve& backward,
    double qs_lower, uint64_t seed, const UntilSuccessOptions& options) {
  RETURN_IF_ERROR(ValidateCandidates(candidates));
  if (!(qs_lower > 0 && qs_lower <= 1)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "qs_lower must be in (0, 1]; got %g (log(1/Q(S)) is undefined at 0)",
        qs_lower));
  }
  if (options.max_attempts < 1) {
    return absl::InvalidArgumentError("max_attempts must be >= 1");
  }
  std::vector<double> lambdas = options.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  std::vector<Bound> raw;
  for (double lambda : lambdas) {
    ASSIGN_OR_RETURN(Bound b, ConditionalBound(forward, backward, qs_lower,
                                               lambda, ConditionalSpec::Auto()));
    raw.push_back(std::move(b));
  }
  TuningBound privacy;
  privacy.base = forward;
  privacy.points.resize(lambdas.size());
  size_t best_index = lambdas.size() - 1;
  for (size_t i = lambdas.size(); i-- > 0;) {
    if (raw[i].epsilon <= raw[best_index].epsilon) best_index = i;
    const Bound& b = raw[best_index];
    privacy.points[i] = {lambdas[i], b.epsilon,
                         absl::StrCat(b.method, "(", b.detail, ")"), std::numeric_limits<double>::quiet_NaN(),
                         lambdas[best_index]};
  }

  TuningJobReport report;
  report.procedure = "until_success";
  report.master_seed = seed;
  report.privacy = std::move(privacy);
  for (int64_t i = 0; i < options.max_attempts; ++i) {
    const Assignment a = AssignRun(seed, i, candidates.size());
    TrialResult trial =
        RunTrial(candidates[a.candidate], i, a.seed, std::nullopt);
    const bool accepted = trial.score.has_value() && *trial.score >= accept;
    report.trials.push_back(std::move(trial));
    if (accepted) {
      report.best = report.trials.back();
      break;
    }
  }
  report.k_drawn = static_cast<int64_t>(report.trials.size());
  if (!report.best.has_value()) {
    report.outside_model = true;
    report.note = absl::StrCat(
        "no run reached the acceptance threshold within ", options.max_attempts,
        " attempts; the conditional-sampling bound does not cover an aborted "
        "run");
  }
  return report;
}

absl::StatusOr<SelectionReport> SelectionDemo(
    const std::vector<double>& utilities, double epsilon,
    const SelectionMechanism& mechanism, uint64_t seed, int64_t jobs) {
  const size_t m = utilities.size();
  if (m == 0) return absl::InvalidArgumentError("need at least one utility");
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError("epsilon must be positive and finite");
  }
  if (jobs < 1) return absl::InvalidArgumentError("jobs must be >= 1");
  const double top = *std::max_element(utilities.begin(), utilities.end());
  const double threshold =
      top - 20 / epsilon * std::log(static_cast<double>(m));
  const double scale = 1 / epsilon;

  SelectionReport report;
  report.exponential_epsilon = epsilon;
  std::optional<RepetitionSampler> sampler;
  std::vector<double> cumulative(m);
  if (mechanism.kind == SelectionMechanism::Kind::kRepeatedLaplace) {
    ASSIGN_OR_RETURN(const PrivacyCurve base, PrivacyCurve::PureDp(epsilon));
    AnalyzeOptions options;
    options.lambdas = {kInf};
    ASSIGN_OR_RETURN(const TuningBound bound,
                     Analyze(mechanism.dist, base, options));
    report.epsilon = bound.points.back().epsilon;
    sampler.emplace(mechanism.dist);
  } else {
    report.epsilon = epsilon;
    std::vector<double> logits(m);
    for (size_t j = 0; j < m; ++j) logits[j] = epsilon * utilities[j] / 2;
    const double lse = LogSumExp(logits);
    double running = 0;
    for (size_t j = 0; j < m; ++j) {
      running += std::exp(logits[j] - lse);
      cumulative[j] = running;
    }
    cumulative[m - 1] = 1;
  }

  int64_t successes = 0;
  for (int64_t job = 0; job < jobs; ++job) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(job)));
    SelectionOutcome out;
    if (mechanism.kind == SelectionMechanism::Kind::kExponential) {
      const double u = rng.Uniform01();
      size_t j = 0;
      while (j + 1 < m && cumulative[j] < u) ++j;
      out.chosen = static_cast<int64_t>(j);
      out.k_drawn = 1;
    } else {
      const int64_t k = sampler->Sample(rng);
      out.k_drawn = k;
      if (k > 0 && k <= kSelectionLoopLimit) {
        for (int64_t run = 0; run < k; ++run) {
          const size_t j = static_cast<size_t>(rng.UniformIndex(m));
          const double score = utilities[j] + rng.Laplace(scale);
          if (!out.noisy_score.has_value() || score > *out.noisy_score) {
            out.noisy_score = score;
            out.chosen = static_cast<int64_t>(j);
          }
        }
      } else if (k > 0) {
        // Multinomial run counts, then the exact law of each candidate's
        // largest noise draw: F_max = F^n.
        int64_t remaining = k;
        for (size_t j = 0; j < m && remaining > 0; ++j) {
          int64_t n = remaining;
          if (j + 1 < m) {
            std::binomial_distribution<int64_t> split(
                remaining, 1.0 / static_cast<double>(m - j));
            n = split(rng.engine());
          }
          remaining -= n;
          if (n == 0) continue;
          const double log_f = std::log(rng.Uniform01()) / static_cast<double>(n);
          const double score =
              utilities[j] +
              LaplaceQuantile(std::exp(log_f), -std::expm1(log_f), scale);
          if (!out.noisy_score.has_value() || score > *out.noisy_score) {
            out.noisy_score = score;
            out.chosen = static_cast<int64_t>(j);
          }
        }
      }
    }
    if (out.chosen.has_value() && utilities[*out.chosen] >= threshold) {
      ++successes;
    }
    report.outcomes.push_back(out);
  }
  report.success_rate =
      static_cast<double>(successes) / static_cast<double>(jobs);
  return report;
}

}  // namespace repdp
