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

#include "repdp/json_io.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "repdp/status_macros.h"

namespace repdp {
namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

absl::Status Invalid(absl::string_view what) {
  return absl::InvalidArgumentError(what);
}

absl::StatusOr<double> ParseNumber(absl::string_view text) {
  const std::string lower = absl::AsciiStrToLower(absl::StripAsciiWhitespace(text));
  if (lower == "inf" || lower == "infinity") return kInf;
  double v;
  if (!absl::SimpleAtod(lower, &v)) {
    return Invalid(absl::StrCat("not a number: '", text, "'"));
  }
  return v;
}

absl::StatusOr<int64_t> ParseInteger(absl::string_view text) {
  int64_t v;
  if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(text), &v)) {
    return Invalid(absl::StrCat("not an integer: '", text, "'"));
  }
  return v;
}

struct InlineSpec {
  std::string head;
  std::vector<std::string> positional;
  std::map<std::string, std::string> keyed;
};

absl::StatusOr<InlineSpec> SplitInline(absl::string_view text) {
  InlineSpec spec;
  const size_t colon = text.find(':');
  spec.head = absl::AsciiStrToLower(
      absl::StripAsciiWhitespace(text.substr(0, colon)));
  if (colon == absl::string_view::npos) return spec;
  for (absl::string_view token :
       absl::StrSplit(text.substr(colon + 1), ',', absl::SkipEmpty())) {
    token = absl::StripAsciiWhitespace(token);
    const size_t eq = token.find('=');
    if (eq == absl::string_view::npos || spec.head == "rdp") {
      if (eq != absl::string_view::npos && spec.head == "rdp" &&
          token.substr(0, eq) == "delta0") {
        spec.keyed["delta0"] = std::string(token.substr(eq + 1));
        continue;
      }
      spec.positional.emplace_back(token);
    } else {
      spec.keyed[absl::AsciiStrToLower(token.substr(0, eq))] =
          std::string(token.substr(eq + 1));
    }
  }
  return spec;
}

absl::StatusOr<double> Get(const InlineSpec& spec, const std::string& key,
                           size_t position) {
  auto it = spec.keyed.find(key);
  if (it != spec.keyed.end()) return ParseNumber(it->second);
  if (position < spec.positional.size()) {
    return ParseNumber(spec.positional[position]);
  }
  return Invalid(absl::StrCat(spec.head, ": missing '", key, "'"));
}

absl::StatusOr<double> GammaFrom(const InlineSpec& spec, double eta) {
  if (spec.keyed.count("mean")) {
    ASSIGN_OR_RETURN(const double mean, ParseNumber(spec.keyed.at("mean")));
    return TnbGammaForMean(eta, mean);
  }
  return Get(spec, "gamma", 0);
}

absl::StatusOr<double> RequireNumber(const json& j, const char* key) {
  if (!j.contains(key)) return Invalid(absl::StrCat("missing field '", key, "'"));
  return NumberFromJson(j.at(key));
}

double OptionalNumber(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  auto v = NumberFromJson(j.at(key));
  return v.ok() ? *v : fallback;
}

std::string ResolveCommand(const std::string& program,
                           const std::string& base_dir) {
  namespace fs = std::filesystem;
  if (program.find('/') != std::string::npos) {
    const fs::path p(program);
    return p.is_absolute() ? program : (fs::path(base_dir) / p).string();
  }
  // Helpers built next to the executable win over PATH.
  std::error_code ec;
  const fs::path self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const fs::path sibling = self.parent_path() / program;
    if (fs::exists(sibling, ec)) return sibling.string();
  }
  return program;
}

}  // namespace

json NumberToJson(double x) {
  if (std::isinf(x)) return x > 0 ? json("inf") : json("-inf");
  if (std::isnan(x)) return json(nullptr);
  return json(x);
}

absl::StatusOr<double> NumberFromJson(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return ParseNumber(j.get<std::string>());
  return Invalid(absl::StrCat("expected a number, got ", j.dump()));
}

json DistributionToJson(const RepetitionDistribution& dist) {
  switch (dist.family()) {
    case Family::kPointMass:
      return {{"family", "point"}, {"k", dist.point()}};
    case Family::kTruncatedNegativeBinomial:
      return {{"family", "tnb"}, {"eta", dist.eta()}, {"gamma", dist.gamma()}};
    case Family::kPoisson:
      return {{"family", "poisson"}, {"mu", dist.mu()}};
    case Family::kTruncated:
      return {{"family", "truncated"},
              {"inner", DistributionToJson(dist.inner())},
              {"limit", dist.limit()}};
  }
  return nullptr;
}

absl::StatusOr<RepetitionDistribution> DistributionFromJson(const json& j) {
  if (j.is_string()) return ParseDistribution(j.get<std::string>());
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    return Invalid("distribution needs a string field 'family'");
  }
  const std::string family = j["family"].get<std::string>();
  absl::StatusOr<RepetitionDistribution> dist;
  auto gamma_for = [&](double eta) -> absl::StatusOr<double> {
    if (j.contains("mean")) {
      ASSIGN_OR_RETURN(const double mean, RequireNumber(j, "mean"));
      return TnbGammaForMean(eta, mean);
    }
    return RequireNumber(j, "gamma");
  };
  if (family == "point") {
    if (!j.contains("k") || !j["k"].is_number_integer()) {
      return Invalid("point needs an integer 'k'");
    }
    dist = RepetitionDistribution::PointMass(j["k"].get<int64_t>());
  } else if (family == "tnb") {
    ASSIGN_OR_RETURN(const double eta, RequireNumber(j, "eta"));
    ASSIGN_OR_RETURN(const double gamma, gamma_for(eta));
    dist = RepetitionDistribution::TruncatedNegativeBinomial(eta, gamma);
  } else if (family == "geometric" || family == "logarithmic") {
    const double eta = family == "geometric" ? 1 : 0;
    ASSIGN_OR_RETURN(const double gamma, gamma_for(eta));
    dist = RepetitionDistribution::TruncatedNegativeBinomial(eta, gamma);
  } else if (family == "poisson") {
    ASSIGN_OR_RETURN(const double mu, RequireNumber(j, "mu"));
    dist = RepetitionDistribution::Poisson(mu);
  } else if (family == "truncated") {
    if (!j.contains("inner") || !j.contains("limit") ||
        !j["limit"].is_number_integer()) {
      return Invalid("truncated needs 'inner' and an integer 'limit'");
    }
    ASSIGN_OR_RETURN(const RepetitionDistribution inner,
                     DistributionFromJson(j["inner"]));
    return RepetitionDistribution::Truncated(inner, j["limit"].get<int64_t>());
  } else {
    return Invalid(absl::StrCat("unknown distribution family '", family, "'"));
  }
  if (!dist.ok()) return dist.status();
  if (j.contains("limit")) {
    if (!j["limit"].is_number_integer()) return Invalid("'limit' must be an integer");
    return RepetitionDistribution::Truncated(*dist, j["limit"].get<int64_t>());
  }
  return dist;
}

json CurveToJson(const PrivacyCurve& curve) {
  json j;
  switch (curve.kind()) {
    case CurveKind::kPureDp:
      j["kind"] = "pure";
      j["epsilon"] = NumberToJson(curve.epsilon());
      break;
    case CurveKind::kZCdp:
      j["kind"] = "zcdp";
      j["rho"] = NumberToJson(curve.rho());
      break;
    case CurveKind::kRdpTable: {
      j["kind"] = "rdp_table";
      json points = json::array();
      for (const RdpPoint& p : curve.points()) {
        points.push_back({NumberToJson(p.lambda), NumberToJson(p.epsilon)});
      }
      j["points"] = points;
      break;
    }
    case CurveKind::kApproxDp:
      j["kind"] = "approx_dp";
      j["epsilon"] = NumberToJson(curve.epsilon());
      j["delta"] = curve.delta();
      break;
  }
  j["delta0"] = curve.delta0();
  return j;
}

absl::StatusOr<PrivacyCurve> CurveFromJson(const json& j) {
  if (j.is_string()) return ParseCurve(j.get<std::string>());
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    return Invalid("privacy curve needs a string field 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  const double delta0 = OptionalNumber(j, "delta0", 0);
  if (kind == "pure") {
    ASSIGN_OR_RETURN(const double eps, RequireNumber(j, "epsilon"));
    return PrivacyCurve::PureDp(eps, delta0);
  }
  if (kind == "zcdp") {
    ASSIGN_OR_RETURN(const double rho, RequireNumber(j, "rho"));
    return PrivacyCurve::ZCdp(rho, delta0);
  }
  if (kind == "approx_dp") {
    ASSIGN_OR_RETURN(const double eps, RequireNumber(j, "epsilon"));
    return PrivacyCurve::ApproxDp(eps, OptionalNumber(j, "delta", 0), delta0);
  }
  if (kind == "rdp_table") {
    if (!j.contains("points") || !j["points"].is_array()) {
      return Invalid("rdp_table needs an array 'points'");
    }
    std::vector<RdpPoint> points;
    for (const json& p : j["points"]) {
      if (!p.is_array() || p.size() != 2) {
        return Invalid("each rdp_table point is [lambda, epsilon]");
      }
      ASSIGN_OR_RETURN(const double lambda, NumberFromJson(p[0]));
      ASSIGN_OR_RETURN(const double eps, NumberFromJson(p[1]));
      points.push_back({lambda, eps});
    }
    return PrivacyCurve::RdpTable(std::move(points), delta0);
  }
  return Invalid(absl::StrCat("unknown curve kind '", kind, "'"));
}

absl::StatusOr<RepetitionDistribution> ParseDistribution(absl::string_view text) {
  text = absl::StripAsciiWhitespace(text);
  if (!text.empty() && text.front() == '{') {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) return Invalid("malformed distribution JSON");
    return DistributionFromJson(j);
  }
  ASSIGN_OR_RETURN(const InlineSpec spec, SplitInline(text));
  absl::StatusOr<RepetitionDistribution> dist;
  if (spec.head == "point") {
    if (spec.positional.empty()) return Invalid("point: missing k");
    ASSIGN_OR_RETURN(const int64_t k, ParseInteger(spec.positional[0]));
    dist = RepetitionDistribution::PointMass(k);
  } else if (spec.head == "tnb") {
    ASSIGN_OR_RETURN(const double eta, Get(spec, "eta", 0));
    InlineSpec rest = spec;
    rest.positional.clear();
    ASSIGN_OR_RETURN(const double gamma, GammaFrom(rest, eta));
    dist = RepetitionDistribution::TruncatedNegativeBinomial(eta, gamma);
  } else if (spec.head == "geometric" || spec.head == "logarithmic") {
    const double eta = spec.head == "geometric" ? 1 : 0;
    ASSIGN_OR_RETURN(const double gamma, GammaFrom(spec, eta));
    dist = RepetitionDistribution::TruncatedNegativeBinomial(eta, gamma);
  } else if (spec.head == "poisson") {
    ASSIGN_OR_RETURN(const double mu, Get(spec, "mu", 0));
    dist = RepetitionDistribution::Poisson(mu);
  } else {
    return Invalid(absl::StrCat("unknown distribution '", spec.head,
                                "' (point, tnb, geometric, logarithmic, "
                                "poisson)"));
  }
  if (!dist.ok()) return dist.status();
  auto limit = spec.keyed.find("limit");
  if (limit != spec.keyed.end()) {
    ASSIGN_OR_RETURN(const int64_t m, ParseInteger(limit->second));
    return RepetitionDistribution::Truncated(*dist, m);
  }
  return dist;
}

absl::StatusOr<PrivacyCurve> ParseCurve(absl::string_view text) {
  text = absl::StripAsciiWhitespace(text);
  if (!text.empty() && text.front() == '{') {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) return Invalid("malformed curve JSON");
    return CurveFromJson(j);
  }
  ASSIGN_OR_RETURN(const InlineSpec spec, SplitInline(text));
  double delta0 = 0;
  if (spec.keyed.count("delta0")) {
    ASSIGN_OR_RETURN(delta0, ParseNumber(spec.keyed.at("delta0")));
  }
  if (spec.head == "pure") {
    ASSIGN_OR_RETURN(const double eps, Get(spec, "epsilon", 0));
    return PrivacyCurve::PureDp(eps, delta0);
  }
  if (spec.head == "zcdp") {
    ASSIGN_OR_RETURN(const double rho, Get(spec, "rho", 0));
    return PrivacyCurve::ZCdp(rho, delta0);
  }
  if (spec.head == "approx") {
    ASSIGN_OR_RETURN(const double eps, Get(spec, "epsilon", 0));
    ASSIGN_OR_RETURN(const double delta, Get(spec, "delta", 1));
    return PrivacyCurve::ApproxDp(eps, delta, delta0);
  }
  if (spec.head == "rdp") {
    if (spec.positional.empty()) return Invalid("rdp: missing points");
    std::vector<RdpPoint> points;
    for (absl::string_view item :
         absl::StrSplit(spec.positional[0], ';', absl::SkipEmpty())) {
      const size_t eq = item.find('=');
      if (eq == absl::string_view::npos) {
        return Invalid("rdp points are written lambda=epsilon;...");
      }
      ASSIGN_OR_RETURN(const double lambda, ParseNumber(item.substr(0, eq)));
      ASSIGN_OR_RETURN(const double eps, ParseNumber(item.substr(eq + 1)));
      points.push_back({lambda, eps});
    }
    return PrivacyCurve::RdpTable(std::move(points), delta0);
  }
  return Invalid(absl::StrCat("unknown base guarantee '", spec.head,
                              "' (pure, zcdp, approx, rdp)"));
}

json TuningBoundToJson(const TuningBound& bound) {
  json points = json::array();
  for (const BoundPoint& p : bound.points) {
    points.push_back({{"lambda", NumberToJson(p.lambda)},
                      {"epsilon", NumberToJson(p.epsilon)},
                      {"method", p.method},
                      {"lambda_hat", NumberToJson(p.lambda_hat)},
                      {"source_lambda", NumberToJson(p.source_lambda)}});
  }
  json j = {{"distribution", DistributionToJson(bound.distribution)},
            {"executed_distribution",
             DistributionToJson(bound.executed_distribution)},
            {"base", CurveToJson(bound.base)},
            {"delta", bound.delta},
            {"points", points}};
  if (bound.approx_dp.has_value()) {
    j["approx_dp"] = {{"epsilon", NumberToJson(bound.approx_dp->epsilon)},
                      {"delta", bound.approx_dp->delta},
                      {"lambda", NumberToJson(bound.approx_dp->lambda)}};
  } else {
    j["approx_dp"] = nullptr;
  }
  return j;
}

json UtilitySummaryToJson(const UtilitySummary& s) {
  json tail = json::array();
  for (const auto& [k, p] : s.tail) tail.push_back({{"k", k}, {"bound", p}});
  return {{"expected_quantile", s.expected_quantile},
          {"per_run_success", s.per_run_success},
          {"success_probability", s.success_probability},
          {"expected_repetitions", s.expected_repetitions},
          {"tail", tail}};
}

json TrialToJson(const TrialResult& t) {
  return {{"run_index", t.run_index},
          {"candidate_id", t.candidate_id},
          {"score", t.score.has_value() ? json(*t.score) : json(nullptr)},
          {"payload", t.payload},
          {"seed_used", t.seed_used},
          {"error", t.error}};
}

json ReportToJson(const TuningJobReport& r) {
  json trials = json::array();
  json scores = json::array();
  for (const TrialResult& t : r.trials) {
    trials.push_back(TrialToJson(t));
    scores.push_back(t.score.has_value() ? json(*t.score) : json(nullptr));
  }
  json privacy = nullptr;
  if (r.privacy.has_value()) {
    privacy = TuningBoundToJson(*r.privacy);
    if (r.procedure == "until_success") {
      // The attempt count has no fixed law here.
      privacy.erase("distribution");
      privacy.erase("executed_distribution");
    }
  }
  return {{"procedure", r.procedure},
          {"master_seed", r.master_seed},
          {"k_drawn", r.k_drawn},
          {"distribution", r.distribution.has_value()
                               ? DistributionToJson(*r.distribution)
                               : json(nullptr)},
          {"best", r.best.has_value() ? TrialToJson(*r.best) : json(nullptr)},
          {"all_scores", scores},
          {"trials", trials},
          {"privacy", privacy},
          {"aborted", r.aborted},
          {"outside_model", r.outside_model},
          {"note", r.note}};
}

absl::StatusOr<FiniteMechanismPair> PairFromJson(const json& j) {
  if (!j.is_object() || !j.contains("p") || !j.contains("p_prime") ||
      !j["p"].is_array() || !j["p_prime"].is_array()) {
    return Invalid("mechanism pair needs arrays 'p' and 'p_prime'");
  }
  std::vector<double> p, pp;
  for (const json& v : j["p"]) {
    if (!v.is_number()) return Invalid("'p' entries must be numbers");
    p.push_back(v.get<double>());
  }
  for (const json& v : j["p_prime"]) {
    if (!v.is_number()) return Invalid("'p_prime' entries must be numbers");
    pp.push_back(v.get<double>());
  }
  return FiniteMechanismPair::Create(std::move(p), std::move(pp));
}

absl::StatusOr<JobConfig> JobConfigFromJson(const json& j,
                                            const std::string& base_dir) {
  if (!j.is_object()) return Invalid("job config must be a JSON object");
  for (const char* key : {"candidates", "base_guarantee"}) {
    if (!j.contains(key)) {
      return Invalid(absl::StrCat("job config is missing '", key, "'"));
    }
  }
  JobConfig config;
  if (!j["candidates"].is_array() || j["candidates"].empty()) {
    return Invalid("'candidates' must be a non-empty array");
  }
  for (const json& c : j["candidates"]) {
    CandidateSpec spec;
    if (!c.contains("id") || !c["id"].is_string()) {
      return Invalid("every candidate needs a string 'id'");
    }
    spec.id = c["id"].get<std::string>();
    if (c.contains("hyperparameters")) spec.hyperparameters = c["hyperparameters"];
    if (!c.contains("command") || !c["command"].is_array() ||
        c["command"].empty()) {
      return Invalid(absl::StrCat("candidate ", spec.id,
                                  " needs a non-empty 'command' array"));
    }
    for (const json& arg : c["command"]) {
      if (!arg.is_string()) return Invalid("command arguments must be strings");
      spec.command.push_back(arg.get<std::string>());
    }
    spec.command[0] = ResolveCommand(spec.command[0], base_dir);
    config.candidates.push_back(std::move(spec));
  }
  if (j.contains("distribution") && !j["distribution"].is_null()) {
    ASSIGN_OR_RETURN(config.distribution, DistributionFromJson(j["distribution"]));
  }
  ASSIGN_OR_RETURN(config.base, CurveFromJson(j["base_guarantee"]));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) {
      return Invalid("'seed' must be a non-negative integer");
    }
    config.seed = j["seed"].get<uint64_t>();
  }
  config.options.analyze.target_delta = 1e-6;
  if (j.contains("options")) {
    const json& o = j["options"];
    if (o.contains("delta")) {
      ASSIGN_OR_RETURN(const double delta, NumberFromJson(o["delta"]));
      config.options.analyze.target_delta = delta;
    }
    if (o.contains("workers")) config.options.workers = o["workers"].get<int>();
    if (o.contains("wall_clock_cap") && !o["wall_clock_cap"].is_null()) {
      ASSIGN_OR_RETURN(const double cap, NumberFromJson(o["wall_clock_cap"]));
      config.options.wall_clock_cap_seconds = cap;
    }
    if (o.contains("k_cap") && !o["k_cap"].is_null()) {
      if (!o["k_cap"].is_number_integer()) return Invalid("'k_cap' must be an integer");
      config.options.k_cap = o["k_cap"].get<int64_t>();
    }
  }
  return config;
}

absl::StatusOr<json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j = json::parse(buffer.str(), nullptr, false);
  if (j.is_discarded()) {
    return Invalid(absl::StrCat(path, " is not valid JSON"));
  }
  return j;
}

}  // namespace repdp
