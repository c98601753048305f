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

// Small numerical routines shared by the accountant, utility and oracle code.

#ifndef REPDP_NUMERIC_H_
#define REPDP_NUMERIC_H_

#include <functional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace repdp {

// log(sum(exp(v))) with the usual max shift. Empty input or all -inf gives
// -inf.
double LogSumExp(std::span<const double> values);

// n points spaced evenly in log between lo and hi, both endpoints included.
std::vector<double> LogSpace(double lo, double hi, int n);

struct MinimizeResult {
  double x = 0;
  double value = 0;
};

// Golden-section search for a minimum of a unimodal function on [lo, hi].
// The endpoints are evaluated as well, so for non-unimodal inputs the result
// is still one of the evaluated points.
MinimizeResult GoldenSectionMinimize(const std::function<double(double)>& f,
                                     double lo, double hi, double tolerance,
                                     int max_iterations = 200);

// Adaptive Simpson quadrature. Fails if the recursion depth is exhausted
// before the tolerance is met.
// Scans n log-spaced points on [lo, hi] (lo > 0) and polishes the best cell
// by golden section in log space. Not a global guarantee, but never worse
// than the grid.
MinimizeResult MinimizeLogGrid(const std::function<double(double)>& f,
                               double lo, double hi, int n,
                               double log_tolerance = 1e-10);

absl::StatusOr<double> AdaptiveSimpson(const std::function<double(double)>& f,
                                       double lo, double hi,
                                       double absolute_tolerance,
                                       int max_depth = 48);

// Given a predicate that is false on [lo, t) and true on [t, hi], returns an
// approximation of t from above (the returned point satisfies the predicate
// whenever pred(hi) holds).
double BisectBoundary(const std::function<bool(double)>& pred, double lo,
                      double hi, int iterations);

}  // namespace repdp

#endif  // REPDP_NUMERIC_H_
