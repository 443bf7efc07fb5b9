#include "subgeo/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "subgeo/errors.hpp"
#include "subgeo/parallel.hpp"

namespace subgeo {

namespace {

void require_probability(std::span<const double> v, const char* what) {
  double s = 0.0;
  for (double x : v) {
    if (!(x >= -1e-12)) throw DomainError(std::string(what) + ": negative entry");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-10)
    throw DomainError(std::string(what) + ": entries sum to " + std::to_string(s));
}

void require_times(std::span<const double> times) {
  if (times.empty()) throw InsufficientDataError("tv_curve: no time points");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0)) throw DomainError("tv_curve: times must be >= 0");
    if (k && !(times[k] > times[k - 1])) throw DomainError("tv_curve: times must increase");
  }
}

/// p e^{tQ}, in pieces of at most max_rate_time / lambda.
std::vector<double> advance(const Ctmc& m, std::vector<double> p, double t,
                            const UniformizationOptions& u) {
  const double lambda = m.max_exit_rate();
  if (lambda == 0.0 || t == 0.0) return p;
  const double piece = 0.5 * u.max_rate_time / lambda;
  const auto n = static_cast<std::size_t>(std::ceil(t / piece));
  const double h = t / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) p = propagate(m, p, h, u);
  return p;
}

std::size_t pieces(const Ctmc& m, double t, const UniformizationOptions& u) {
  const double lambda = m.max_exit_rate();
  if (lambda == 0.0 || t == 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(t * lambda / (0.5 * u.max_rate_time)));
}

double tv_unchecked(std::span<const double> mu, std::span<const double> nu) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
  return std::min(1.0, 0.5 * s);
}

void fill_rates(TvCurve& c, const RateProfile& p) {
  c.rate_value.resize(c.times.size());
  c.rate_product.resize(c.times.size());
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    c.rate_value[k] = p.rate(c.times[k]);
    c.rate_product[k] = c.rate_value[k] * c.tv[k];
  }
}

TvCurve start_curve(const Ctmc& m, std::size_t x0, std::span<const double> times,
                    const UniformizationOptions& u) {
  if (x0 >= m.size()) throw DimensionError("tv_curve: x0 out of range");
  require_times(times);
  TvCurve c;
  c.times.assign(times.begin(), times.end());
  c.model = m.name();
  c.x0 = static_cast<double>(x0);
  const double roundoff = 64.0 * static_cast<double>(m.size()) *
                          std::numeric_limits<double>::epsilon();
  c.tv_error = static_cast<double>(std::max<std::size_t>(1, pieces(m, times.back(), u))) *
                   u.epsilon + roundoff;
  return c;
}

}  // namespace

double tv_distance(std::span<const double> mu, std::span<const double> nu) {
  if (mu.size() != nu.size()) throw DimensionError("tv_distance: lengths differ");
  require_probability(mu, "tv_distance(mu)");
  require_probability(nu, "tv_distance(nu)");
  return tv_unchecked(mu, nu);
}

std::string TvCurve::to_csv() const {
  std::string out = "t,tv,rate_value,rate_product\n";
  char buf[128];
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", times[k], tv[k], rate_value[k],
                  rate_product[k]);
    out += buf;
  }
  return out;
}

TvCurve make_curve(std::vector<double> times, std::vector<double> tv, const RateProfile& p,
                   std::string model, double x0) {
  if (times.size() != tv.size()) throw DimensionError("make_curve: lengths differ");
  TvCurve c;
  c.times = std::move(times);
  c.tv = std::move(tv);
  c.model = std::move(model);
  c.x0 = x0;
  fill_rates(c, p);
  return c;
}

TvCurve tv_curve(const Ctmc& m, std::size_t x0, const RateProfile& p,
                 std::span<const double> times, const TvOptions& opts) {
  auto c = start_curve(m, x0, times, opts.uniformization);
  const auto pi = stationary_distribution(m);
  c.tv = map_paths_omp(times.size(), opts.jobs, [&](std::size_t k) {
    std::vector<double> p0(m.size(), 0.0);
    p0[x0] = 1.0;
    return tv_unchecked(advance(m, std::move(p0), times[k], opts.uniformization), pi);
  });
  fill_rates(c, p);
  return c;
}

TvCurve tv_curve_serial(const Ctmc& m, std::size_t x0, const RateProfile& p,
                        std::span<const double> times, const UniformizationOptions& u) {
  auto c = start_curve(m, x0, times, u);
  const auto pi = stationary_distribution(m);
  std::vector<double> state(m.size(), 0.0);
  state[x0] = 1.0;
  double t = 0.0;
  for (double tk : times) {
    state = advance(m, std::move(state), tk - t, u);
    t = tk;
    c.tv.push_back(tv_unchecked(state, pi));
  }
  c.tv_error *= static_cast<double>(times.size());
  fill_rates(c, p);
  return c;
}

CheckReport check_vanishing(const TvCurve& curve, double burn_in, std::size_t window) {
  if (window == 0) throw std::invalid_argument("check_vanishing: window must be >= 1");
  std::size_t first = 0;
  while (first < curve.times.size() && curve.times[first] < burn_in) ++first;
  const std::size_t n = curve.times.size() - first;
  if (n < window)
    throw InsufficientDataError("check_vanishing: " + std::to_string(n) +
                                " points past burn-in, window " + std::to_string(window));
  const std::size_t blocks = n / window;
  const std::size_t start = curve.times.size() - blocks * window;
  std::vector<double> avg(blocks), noise(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    double s = 0.0, r = 0.0;
    for (std::size_t k = start + b * window; k < start + (b + 1) * window; ++k) {
      s += curve.rate_product[k];
      r += curve.rate_value[k];
    }
    avg[b] = s / static_cast<double>(window);
    noise[b] = curve.tv_error * r / static_cast<double>(window);
  }
  CheckReport rep("vanishing");
  for (std::size_t b = 1; b < blocks; ++b)
    rep.require_le("window_avg_nonincreasing", {curve.times[start + b * window]}, avg[b],
                   avg[b - 1], noise[b] + noise[b - 1]);
  rep.require_lt("final_avg<first_avg/10", {curve.times.back()}, avg.back(), avg.front() / 10.0);
  rep.set_series("window_average", avg);
  rep.set_constant("burn_in", burn_in);
  rep.set_constant("window", static_cast<double>(window));
  rep.set_constant("first_average", avg.front());
  rep.set_constant("final_average", avg.back());
  return rep;
}

RateFit fit_polynomial_rate(const TvCurve& curve, double t_lo, double t_hi) {
  if (!(t_hi > t_lo) || !(t_lo > 0.0)) throw DomainError("fit_polynomial_rate: bad t range");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    const double t = curve.times[k];
    if (t < t_lo || t > t_hi) continue;
    if (!(curve.tv[k] > 0.0)) throw DomainError("fit_polynomial_rate: tv must be > 0 on the range");
    lx.push_back(std::log(t));
    ly.push_back(std::log(curve.tv[k]));
  }
  if (lx.size() < 2) throw InsufficientDataError("fit_polynomial_rate: fewer than 2 points");
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("fit_polynomial_rate: degenerate t range");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = lx.size();
  return f;
}

CheckReport check_polynomial_rate(const RateFit& fit, double alpha, double margin) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("check_polynomial_rate: alpha in (0,1)");
  CheckReport rep("polynomial_rate");
  const double predicted = -alpha / (1.0 - alpha);
  rep.require_le("slope<=-alpha/(1-alpha)+margin", {alpha}, fit.slope, predicted + margin);
  rep.set_constant("slope", fit.slope);
  rep.set_constant("predicted_slope", predicted);
  rep.set_constant("margin", margin);
  rep.set_constant("points", static_cast<double>(fit.points));
  return rep;
}

CheckReport check_truncation_shift(const TvCurve& a, const TvCurve& b, double tolerance) {
  if (a.times != b.times) throw DimensionError("check_truncation_shift: time grids differ");
  CheckReport rep("truncation_shift");
  double worst = 0.0;
  std::vector<double> shift(a.times.size());
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    shift[k] = std::abs(a.tv[k] - b.tv[k]);
    worst = std::max(worst, shift[k]);
    rep.require_lt("|tv_N-tv_2N|<tol", {a.times[k]}, shift[k], tolerance);
  }
  rep.set_series("shift", shift);
  rep.set_constant("max_shift", worst);
  return rep;
}

}  // namespace subgeo
