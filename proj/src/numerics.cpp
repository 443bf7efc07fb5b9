#include "subgeo/numerics.hpp"

#include <cassert>

namespace subgeo::numerics {

QuinticHermite::QuinticHermite(std::vector<double> x, std::vector<double> y,
                               std::vector<double> dy, std::vector<double> d2y)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)), d2y_(std::move(d2y)) {
  if (x_.size() < 2 || y_.size() != x_.size() || dy_.size() != x_.size() ||
      d2y_.size() != x_.size()) {
    throw DimensionError("QuinticHermite needs >= 2 knots with matching value arrays");
  }
}

double QuinticHermite::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / h;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  const double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
  const double h1 = s - 6 * s3 + 8 * s4 - 3 * s5;
  const double h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
  const double h3 = 10 * s3 - 15 * s4 + 6 * s5;
  const double h4 = -4 * s3 + 7 * s4 - 3 * s5;
  const double h5 = 0.5 * s3 - s4 + 0.5 * s5;
  return y_[i] * h0 + h * dy_[i] * h1 + h * h * d2y_[i] * h2 + y_[i + 1] * h3 +
         h * dy_[i + 1] * h4 + h * h * d2y_[i + 1] * h5;
}

double dormand_prince(const std::function<double(double)>& f, double t0, double y0,
                      double t1, const OdeTolerance& tol,
                      const std::function<void(double, double)>& on_step) {
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = t0;
  double y = y0;
  if (t1 <= t0) return y0;
  double h = std::min({1e-3 * std::max(1.0, std::abs(t1 - t0)), t1 - t0, tol.max_step});
  double k1 = f(y);
  int guard = 0;
  while (t < t1) {
    if (++guard > 50'000'000) throw QuadratureError("ODE integration step limit reached");
    if (t + h > t1) h = t1 - t;
    const double k2 = f(y + h * a21 * k1);
    const double k3 = f(y + h * (a31 * k1 + a32 * k2));
    const double k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = f(y_new);
    const double err_abs =
        std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
    const double scale = tol.abs + tol.rel * std::max(std::abs(y), std::abs(y_new));
    const double err = err_abs / scale;
    if (err <= 1.0 || h <= 1e-14 * std::max(1.0, std::abs(t))) {
      t = (t + h >= t1) ? t1 : t + h;
      y = y_new;
      k1 = k7;
      if (on_step) on_step(t, y);
      const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
      h = std::min(h * grow, tol.max_step);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
  return y;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  assert(lo > 0 && hi > 0);
  auto e = linspace(std::log(lo), std::log(hi), n);
  for (auto& v : e) v = std::exp(v);
  if (!e.empty()) {
    e.front() = lo;
    e.back() = hi;
  }
  return e;
}

}  // namespace subgeo::numerics
