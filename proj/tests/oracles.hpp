#pragma once

// Test-only reference computations. None of these share code paths with the
// library: fixed-step Simpson and RK4, explicit interval intersection, dense
// matrix exponentials by eigen-free series, and so on.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

/// Composite Simpson rule with `panels` (even) sub-intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t panels = 200000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i)
    sum += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Classical RK4 with a fixed step for y' = f(y).
inline double rk4(const std::function<double(double)>& f, double y0, double t1,
                  std::size_t steps = 200000) {
  const double h = t1 / static_cast<double>(steps);
  double y = y0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

/// Plain bisection of an increasing function.
inline double bisect(const std::function<double(double)>& f, double target, double lo,
                     double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// H_phi for phi(x) = 1 + ln x via the exponential integral:
/// int_1^u ds/(1+ln s) = e^{-1} (Ei(1 + ln u) - Ei(1)).
inline double h_log_smoothed(double u) {
  return std::exp(-1.0) * (std::expint(1.0 + std::log(u)) - std::expint(1.0));
}

/// Row-major dense matrix helpers.
using Dense = std::vector<double>;

inline Dense matmul(const Dense& a, const Dense& b, std::size_t n) {
  Dense c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += a[i * n + k] * b[k * n + j];
  return c;
}

/// e^{tQ} by scaling and squaring of a Taylor series (dense, small n only).
inline Dense expm(const Dense& q, double t, std::size_t n) {
  int squarings = 0;
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(q[i * n + j]);
    norm = std::max(norm, row);
  }
  double scaled = norm * t;
  while (scaled > 0.5) {
    scaled /= 2;
    ++squarings;
  }
  const double s = t / std::ldexp(1.0, squarings);
  Dense a(n * n);
  for (std::size_t i = 0; i < n * n; ++i) a[i] = q[i] * s;
  Dense result(n * n, 0.0), term(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) result[i * n + i] = term[i * n + i] = 1.0;
  for (int k = 1; k < 30; ++k) {
    term = matmul(term, a, n);
    for (auto& v : term) v /= k;
    for (std::size_t i = 0; i < n * n; ++i) result[i] += term[i];
  }
  for (int i = 0; i < squarings; ++i) result = matmul(result, result, n);
  return result;
}

}  // namespace oracle
