#pragma once

// Small numeric kernels shared by the rate machinery and the path integrals:
// adaptive Gauss-Kronrod quadrature, a scalar Dormand-Prince stepper, quintic
// Hermite interpolation and bracketed bisection.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <span>
#include <vector>

#include "subgeo/errors.hpp"

namespace subgeo::numerics {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double fsum = f(mid - dx) + f(mid + dx);
    kronrod += kKronrodWeights[j] * fsum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * fsum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive G7/K15 quadrature of f over [a, b].
///
/// Stops when the summed error estimate is below max(abs_tol, rel_tol*|I|).
/// Throws QuadratureError when `max_intervals` panels do not suffice.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol,
                           int max_intervals = 2000) {
  if (a == b) return {0.0, 0.0, 0};
  const double sign = a < b ? 1.0 : -1.0;
  if (a > b) std::swap(a, b);

  std::priority_queue<detail::Panel> panels;
  auto first = detail::gauss_kronrod_15(f, a, b);
  double total = first.value;
  double error = first.error;
  panels.push(first);
  int count = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (count >= max_intervals) {
      throw QuadratureError("adaptive quadrature did not reach tolerance within " +
                            std::to_string(max_intervals) + " panels");
    }
    const auto worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }
  // Re-sum in a fixed order so the value does not depend on accumulated drift.
  total = 0.0;
  error = 0.0;
  std::vector<detail::Panel> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(),
            [](const detail::Panel& l, const detail::Panel& r) { return l.a < r.a; });
  for (const auto& p : all) {
    total += p.value;
    error += p.error;
  }
  return {sign * total, error, count};
}

/// Bisection for an increasing function: returns x in [lo, hi] with
/// f(x) = target, to relative width `rel_tol` of the bracket end.
/// Requires f(lo) <= target <= f(hi).
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi, double rel_tol,
                         int max_iter = 200) {
  for (int i = 0; i < max_iter && (hi - lo) > rel_tol * std::abs(hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Quintic Hermite interpolation through (x, y, y', y'') knots.
class QuinticHermite {
 public:
  QuinticHermite() = default;
  QuinticHermite(std::vector<double> x, std::vector<double> y, std::vector<double> dy,
                 std::vector<double> d2y);

  [[nodiscard]] bool empty() const { return x_.empty(); }
  [[nodiscard]] double front_x() const { return x_.front(); }
  [[nodiscard]] double back_x() const { return x_.back(); }
  [[nodiscard]] double back_y() const { return y_.back(); }
  [[nodiscard]] std::size_t size() const { return x_.size(); }

  /// Evaluate inside [front_x, back_x]; O(log n).
  [[nodiscard]] double operator()(double x) const;

 private:
  std::vector<double> x_, y_, dy_, d2y_;
};

/// Adaptive Dormand-Prince 5(4) integration of the autonomous scalar ODE
/// y' = f(y). Calls `on_step(t, y)` after every accepted step.
struct OdeTolerance {
  double rel = 1e-12;
  double abs = 1e-13;
  double max_step = 1.0e300;
};

double dormand_prince(const std::function<double(double)>& f, double t0, double y0,
                      double t1, const OdeTolerance& tol,
                      const std::function<void(double, double)>& on_step = {});

/// Evenly spaced points, both ends included.
std::vector<double> linspace(double lo, double hi, std::size_t n);
/// Logarithmically spaced points, both ends included; lo > 0.
std::vector<double> logspace(double lo, double hi, std::size_t n);

}  // namespace subgeo::numerics
