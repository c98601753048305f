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

#include "repdp/numeric.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"

namespace repdp {
namespace {

constexpr double kInvPhi = 0.6180339887498949;

struct SimpsonState {
  const std::function<double(double)>& f;
  bool exhausted = false;
};

double SimpsonRecurse(SimpsonState& state, double a, double b, double fa,
                      double fm, double fb, double whole, double tolerance,
                      int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = state.f(lm);
  const double frm = state.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tolerance) {
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    state.exhausted = true;
    return left + right + delta / 15.0;
  }
  return SimpsonRecurse(state, a, m, fa, flm, fm, left, 0.5 * tolerance,
                        depth - 1) +
         SimpsonRecurse(state, m, b, fm, frm, fb, right, 0.5 * tolerance,
                        depth - 1);
}

}  // namespace

double LogSumExp(std::span<const double> values) {
  double max_value = -std::numeric_limits<double>::infinity();
  for (double v : values) max_value = std::max(max_value, v);
  if (!std::isfinite(max_value)) return max_value;
  double sum = 0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

std::vector<double> LogSpace(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 0) return out;
  if (n == 1) return {lo};
  out.reserve(n);
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / (n - 1);
  for (int i = 0; i < n; ++i) out.push_back(std::exp(log_lo + step * i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

MinimizeResult GoldenSectionMinimize(const std::function<double(double)>& f,
                                     double lo, double hi, double tolerance,
                                     int max_iterations) {
  MinimizeResult best{lo, f(lo)};
  auto consider = [&best](double x, double v) {
    if (v < best.value || std::isnan(best.value)) best = {x, v};
  };
  consider(hi, f(hi));
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  consider(c, fc);
  consider(d, fd);
  for (int i = 0; i < max_iterations && (b - a) > tolerance; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }
  return best;
}

MinimizeResult MinimizeLogGrid(const std::function<double(double)>& f,
                               double lo, double hi, int n,
                               double log_tolerance) {
  const std::vector<double> grid = LogSpace(lo, hi, std::max(n, 2));
  size_t best_index = 0;
  MinimizeResult best{grid[0], f(grid[0])};
  for (size_t i = 1; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < best.value || std::isnan(best.value)) {
      best = {grid[i], v};
      best_index = i;
    }
  }
  const double a = std::log(grid[best_index == 0 ? 0 : best_index - 1]);
  const double b =
      std::log(grid[std::min(best_index + 1, grid.size() - 1)]);
  const MinimizeResult polished = GoldenSectionMinimize(
      [&f](double t) { return f(std::exp(t)); }, a, b, log_tolerance);
  if (polished.value < best.value) best = {std::exp(polished.x), polished.value};
  return best;
}

absl::StatusOr<double> AdaptiveSimpson(const std::function<double(double)>& f,
                                       double lo, double hi,
                                       double absolute_tolerance,
                                       int max_depth) {
  if (!(hi > lo)) {
    if (hi == lo) return 0.0;
    return absl::InvalidArgumentError("AdaptiveSimpson: empty interval");
  }
  SimpsonState state{f};
  const double fa = f(lo);
  const double fb = f(hi);
  const double m = 0.5 * (lo + hi);
  const double fm = f(m);
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  const double value = SimpsonRecurse(state, lo, hi, fa, fm, fb, whole,
                                      absolute_tolerance, max_depth);
  if (state.exhausted) {
    return absl::InternalError(
        "AdaptiveSimpson: recursion depth exhausted before tolerance");
  }
  if (!std::isfinite(value)) {
    return absl::InternalError("AdaptiveSimpson: non-finite integrand");
  }
  return value;
}

double BisectBoundary(const std::function<bool(double)>& pred, double lo,
                      double hi, int iterations) {
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace repdp
