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

#ifndef REPDP_FIGURES_H_
#define REPDP_FIGURES_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "repdp/privacy_curve.h"

namespace repdp {

// A family is anything ParseDistribution accepts once ",mean=<m>" is
// appended ("logarithmic", "geometric", "tnb:eta=0.5"), or "poisson", or
// "composition" for k-fold composition at k = round(mean).
struct FigureRequest {
  std::string figure;
  PrivacyCurve base;
  std::vector<std::string> families;
  std::vector<double> means;
  double delta = 1e-6;
  std::vector<double> lambdas;
  double per_run_success = 0.01;
  // conditional_bounds: D_lambda = rate * lambda in both directions.
  double rate = 0.1;
  double a = 0.01;
};

struct FigureRow {
  double x = 0;
  double y = 0;
  std::string series;
};

std::vector<std::string> FigureNames();

// Fills families, means and lambdas left empty with the figure's defaults.
absl::StatusOr<FigureRequest> WithDefaults(FigureRequest request);

absl::StatusOr<std::vector<FigureRow>> ComputeFigure(
    const FigureRequest& request);

// "x,y,series" followed by one line per row, %.17g.
std::string FigureCsv(const std::vector<FigureRow>& rows);

}  // namespace repdp

#endif  // REPDP_FIGURES_H_
