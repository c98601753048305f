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

#include "repdp/figures.h"

#include <cmath>
#include <cstdint>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"
#include "repdp/accountant.h"
#include "repdp/json_io.h"
#include "repdp/kdist.h"
#include "repdp/numeric.h"
#include "repdp/oracle.h"
#include "repdp/status_macros.h"
#include "repdp/utility.h"

namespace repdp {
namespace {

constexpr char kComposition[] = "composition";

const std::vector<std::string>& AllFamilies() {
  static const auto* families = new std::vector<std::string>{
      "tnb:eta=-0.5", "logarithmic", "tnb:eta=0.5", "geometric", "tnb:eta=2",
      "poisson"};
  return *families;
}

std::string Label(const std::string& family, double mean) {
  if (family == kComposition) {
    return absl::StrCat("composition_k=", std::llround(mean));
  }
  return absl::StrCat(absl::StrReplaceAll(family, {{":", "_"}, {",", "_"}}),
                      "_mean=", absl::StrFormat("%g", mean));
}

absl::StatusOr<RepetitionDistribution> FamilyAtMean(const std::string& family,
                                                    double mean) {
  if (family == kComposition) {
    const int64_t k = std::llround(mean);
    return RepetitionDistribution::PointMass(std::max<int64_t>(k, 1));
  }
  if (family == "poisson") return RepetitionDistribution::Poisson(mean);
  const bool has_params = family.find(':') != std::string::npos;
  return ParseDistribution(absl::StrCat(family, has_params ? "," : ":",
                                        "mean=", absl::StrFormat("%.17g", mean)));
}

std::vector<double> FiniteOrders(const std::vector<double>& lambdas) {
  std::vector<double> out;
  for (double l : lambdas) {
    if (std::isfinite(l) && l > 1) out.push_back(l);
  }
  return out;
}

// The k-fold composition of base on the given orders.
absl::StatusOr<PrivacyCurve> Composition(const PrivacyCurve& base, int64_t k,
                                         const std::vector<double>& lambdas) {
  std::vector<RdpPoint> points;
  for (double l : lambdas) {
    ASSIGN_OR_RETURN(const double eps, EvalCurve(base, l));
    points.push_back({l, static_cast<double>(k) * eps});
  }
  return PrivacyCurve::RdpTable(std::move(points));
}

absl::StatusOr<std::vector<FigureRow>> RdpFigure(const FigureRequest& r) {
  const std::vector<double> orders = FiniteOrders(r.lambdas);
  if (orders.empty()) return absl::InvalidArgumentError("no finite order > 1 in the lambda grid");
  std::vector<FigureRow> rows;
  for (double l : orders) {
    ASSIGN_OR_RETURN(const double eps, EvalCurve(r.base, l));
    rows.push_back({l, eps, "base"});
  }
  AnalyzeOptions options;
  options.lambdas = orders;
  for (double mean : r.means) {
    for (const std::string& family : r.families) {
      if (family == kComposition) continue;
      ASSIGN_OR_RETURN(const RepetitionDistribution dist, FamilyAtMean(family, mean));
      ASSIGN_OR_RETURN(const TuningBound bound, Analyze(dist, r.base, options));
      const std::string label = Label(family, mean);
      for (const BoundPoint& p : bound.points) {
        rows.push_back({p.lambda, p.epsilon, label});
      }
    }
    const int64_t k = std::max<int64_t>(std::llround(mean), 1);
    for (double l : orders) {
      ASSIGN_OR_RETURN(const double eps, EvalCurve(r.base, l));
      rows.push_back({l, static_cast<double>(k) * eps, Label(kComposition, mean)});
    }
  }
  return rows;
}

// The (epsilon, delta)-DP epsilon of `dist`, with composition handled as
// its own RDP curve.
absl::StatusOr<double> ApproxEpsilon(const FigureRequest& r,
                                     const std::string& family, double mean,
                                     const std::vector<double>& orders) {
  if (family == kComposition) {
    ASSIGN_OR_RETURN(const PrivacyCurve composed,
                     Composition(r.base, std::max<int64_t>(std::llround(mean), 1),
                                 orders));
    ASSIGN_OR_RETURN(const ApproxDpGuarantee g, RdpToApproxDp(composed, r.delta));
    return g.epsilon;
  }
  ASSIGN_OR_RETURN(const RepetitionDistribution dist, FamilyAtMean(family, mean));
  AnalyzeOptions options;
  options.lambdas = orders;
  options.target_delta = r.delta;
  ASSIGN_OR_RETURN(const TuningBound bound, Analyze(dist, r.base, options));
  if (!bound.approx_dp.has_value()) {
    return absl::InvalidArgumentError(
        absl::StrCat("no (eps, ", r.delta, ")-DP conversion for ", Label(family, mean)));
  }
  return bound.approx_dp->epsilon;
}

absl::StatusOr<std::vector<FigureRow>> MeanFigure(const FigureRequest& r) {
  std::vector<FigureRow> rows;
  std::vector<double> orders = r.lambdas;
  for (const std::string& family : r.families) {
    const std::string series =
        family == kComposition ? std::string(kComposition)
                               : absl::StrReplaceAll(family, {{":", "_"}, {",", "_"}});
    for (double mean : r.means) {
      ASSIGN_OR_RETURN(const double eps, ApproxEpsilon(r, family, mean, orders));
      double y = 0;
      if (r.figure == "adp_vs_mean") {
        rows.push_back({mean, eps, series});
        continue;
      }
      ASSIGN_OR_RETURN(const RepetitionDistribution dist, FamilyAtMean(family, mean));
      if (r.figure == "quantile_vs_eps") {
        ASSIGN_OR_RETURN(y, ExpectedQuantile(dist));
      } else {
        ASSIGN_OR_RETURN(y, SuccessProbability(dist, r.per_run_success));
      }
      rows.push_back({eps, y, series});
    }
  }
  return rows;
}

absl::StatusOr<std::vector<FigureRow>> ConditionalFigure(const FigureRequest& r) {
  std::vector<FigureRow> rows;
  for (double lambda : FiniteOrders(r.lambdas)) {
    ASSIGN_OR_RETURN(const Figure8Solution sol,
                     SolveFigure8(lambda, r.rate * lambda, r.a));
    ASSIGN_OR_RETURN(const ConditionalInstance inst,
                     WorstCaseConditional(sol.s, sol.t, r.a));
    const FiniteMechanismPair& pair = inst.pair;
    ASSIGN_OR_RETURN(
        const Bound upper,
        ConditionalBound(
            [&](double o) { return RenyiDivergence(pair.p(), pair.p_prime(), o); },
            [&](double o) { return RenyiDivergence(pair.p_prime(), pair.p(), o); },
            inst.conditioned.qs, lambda, ConditionalSpec::Preset(2)));
    rows.push_back({lambda, upper.epsilon, "upper_bound"});
    rows.push_back({lambda,
                    RenyiDivergence(inst.conditioned.pair.p(),
                                    inst.conditioned.pair.p_prime(), lambda),
                    "exact_lower"});
  }
  return rows;
}

}  // namespace

std::vector<std::string> FigureNames() {
  return {"rdp_curves",      "rdp_compare",  "adp_vs_mean",
          "quantile_vs_eps", "beta_vs_eps",  "conditional_bounds"};
}

absl::StatusOr<FigureRequest> WithDefaults(FigureRequest r) {
  const std::string& f = r.figure;
  if (f == "rdp_curves") {
    if (r.families.empty()) r.families = {"logarithmic"};
    if (r.means.empty()) r.means = {2, 10, 100};
  } else if (f == "rdp_compare") {
    if (r.families.empty()) r.families = AllFamilies();
    if (r.means.empty()) r.means = {10};
  } else if (f == "adp_vs_mean" || f == "quantile_vs_eps" || f == "beta_vs_eps") {
    if (r.families.empty()) {
      r.families = AllFamilies();
      r.families.push_back(kComposition);
    }
    if (r.means.empty()) {
      r.means = f == "adp_vs_mean" ? LogSpace(2, 100, 20) : LogSpace(2, 1000, 25);
    }
  } else if (f == "conditional_bounds") {
    if (r.lambdas.empty()) r.lambdas = {2, 4, 8, 16, 32};
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown figure '", f, "'"));
  }
  if (r.lambdas.empty()) r.lambdas = StandardLambdaGrid();
  for (double m : r.means) {
    if (!(m > 1) || !std::isfinite(m)) {
      return absl::InvalidArgumentError(absl::StrCat("means must be finite and > 1; got ", m));
    }
  }
  if (!(r.delta > 0 && r.delta < 1)) {
    return absl::InvalidArgumentError("delta must be in (0, 1)");
  }
  if (!(r.per_run_success >= 0 && r.per_run_success <= 1)) {
    return absl::InvalidArgumentError("per-run success must be in [0, 1]");
  }
  if (!(r.rate > 0) || !(r.a > 0 && r.a < 0.5)) {
    return absl::InvalidArgumentError("need rate > 0 and a in (0, 0.5)");
  }
  return r;
}

absl::StatusOr<std::vector<FigureRow>> ComputeFigure(const FigureRequest& request) {
  ASSIGN_OR_RETURN(const FigureRequest r, WithDefaults(request));
  if (r.figure == "rdp_curves" || r.figure == "rdp_compare") return RdpFigure(r);
  if (r.figure == "conditional_bounds") return ConditionalFigure(r);
  return MeanFigure(r);
}

std::string FigureCsv(const std::vector<FigureRow>& rows) {
  std::string out = "x,y,series\n";
  for (const FigureRow& row : rows) {
    absl::StrAppendFormat(&out, "%.17g,%.17g,%s\n", row.x, row.y, row.series);
  }
  return out;
}

}  // namespace repdp
