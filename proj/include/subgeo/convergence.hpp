#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "subgeo/models.hpp"
#include "subgeo/rates.hpp"
#include "subgeo/report.hpp"

namespace subgeo {

/// (1/2) sum |mu_i - nu_i|, the minimal mismatch probability over couplings.
/// Both vectors must be probability vectors (sum 1 within 1e-10).
double tv_distance(std::span<const double> mu, std::span<const double> nu);

struct TvCurve {
  std::vector<double> times;
  std::vector<double> tv;
  std::vector<double> rate_value;    // phi(H^{-1}(t))
  std::vector<double> rate_product;  // rate_value * tv
  std::string model;
  double x0 = 0.0;
  /// Absolute error budget on each tv value (Poisson truncation plus
  /// rounding); differences below it are noise.
  double tv_error = 0.0;

  std::string to_csv() const;
};

/// Build a curve from given tv values (synthetic curves, tests).
TvCurve make_curve(std::vector<double> times, std::vector<double> tv, const RateProfile& p,
                   std::string model = "synthetic", double x0 = 0.0);

struct TvOptions {
  UniformizationOptions uniformization{};
  int jobs = 1;
};

/// tv(t) = tv_distance(row x0 of e^{tQ}, pi). Each time point is an
/// independent solve from delta_{x0}, split into pieces that respect the
/// rate*time cap, so the curve does not depend on `jobs`.
TvCurve tv_curve(const Ctmc& m, std::size_t x0, const RateProfile& p,
                 std::span<const double> times, const TvOptions& opts = {});

/// Serial reference: propagates incrementally from one time point to the next.
TvCurve tv_curve_serial(const Ctmc& m, std::size_t x0, const RateProfile& p,
                        std::span<const double> times,
                        const UniformizationOptions& u = {});

/// Windowed decay gate on rate_product past burn_in: window averages are
/// non-increasing (up to the curve's error budget) and the last is below a
/// tenth of the first. Blocks of `window` points are anchored at the last
/// point; leftovers next to burn_in are dropped.
CheckReport check_vanishing(const TvCurve& curve, double burn_in, std::size_t window);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of ln tv against ln t over t in [t_lo, t_hi].
RateFit fit_polynomial_rate(const TvCurve& curve, double t_lo, double t_hi);

/// slope <= -alpha/(1-alpha) + margin.
CheckReport check_polynomial_rate(const RateFit& fit, double alpha, double margin = 0.2);

/// max_t |tv_a(t) - tv_b(t)| on a shared time grid (bias of truncation).
CheckReport check_truncation_shift(const TvCurve& a, const TvCurve& b, double tolerance);

}  // namespace subgeo
