#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subgeo/numerics.hpp"
#include "subgeo/report.hpp"

namespace subgeo {

enum class RateKind { Polynomial, LogSmoothed, Custom };

/// A concave rate phi on [1, inf) together with its derivative.
///
/// Polynomial: phi(x) = scale * x^alpha, alpha in (0,1), scale > 0.
/// LogSmoothed: phi(x) = 1 + ln x.
/// Custom: user evaluator pair, or a (x, phi, phi') table interpolated by
/// cubic Hermite pieces and continued linearly past the last knot.
class RateFunction {
 public:
  static RateFunction polynomial(double alpha, double scale = 1.0);
  static RateFunction log_smoothed();
  static RateFunction custom(std::string name, std::function<double(double)> phi,
                             std::function<double(double)> dphi);
  static RateFunction tabulated(std::vector<double> x, std::vector<double> phi,
                                std::vector<double> dphi);

  /// phi(x); throws DomainError for x < 1.
  double operator()(double x) const;
  double derivative(double x) const;

  RateKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }
  const std::string& name() const { return name_; }
  /// Compact description, e.g. `polynomial(alpha=0.5,scale=1)`.
  std::string describe() const;

 private:
  RateFunction() = default;

  RateKind kind_ = RateKind::Polynomial;
  double alpha_ = 0.5;
  double scale_ = 1.0;
  std::string name_;
  std::function<double(double)> phi_;
  std::function<double(double)> dphi_;
};

enum class InverseMethod { ClosedForm, OdeIntegrate, BisectOnQuadrature };

const char* to_string(InverseMethod m);

/// A rate function plus the evaluation strategy for H_phi^{-1}.
///
/// Immutable after construction. With OdeIntegrate the solution of
/// y' = phi(y), y(0) = 1 is tabulated eagerly (in log form) up to
/// `cache_horizon`; lookups inside the table are O(log n), later times are
/// integrated on demand from the last knot. Copies share the table.
class RateProfile {
 public:
  explicit RateProfile(RateFunction rate);
  RateProfile(RateFunction rate, InverseMethod method, double tolerance = 1e-8,
              double cache_horizon = 1e5);

  const RateFunction& rate_function() const { return rate_; }
  InverseMethod method() const { return method_; }
  double tolerance() const { return tolerance_; }

  double phi(double x) const { return rate_(x); }
  double dphi(double x) const { return rate_.derivative(x); }

  /// H_phi(u) = int_1^u ds / phi(s). Closed form for Polynomial, adaptive
  /// quadrature otherwise.
  double h_phi(double u) const;
  /// H_phi by quadrature regardless of kind.
  double h_phi_quadrature(double u) const;
  /// H_phi^{-1}(t) by the profile's method.
  double h_phi_inv(double t) const;
  /// (H_phi^{-1})'(t) = phi(H_phi^{-1}(t)); this is also the rate r_*(t).
  double rate(double t) const { return phi(h_phi_inv(t)); }
  /// (H_phi^{-1})''(t) = phi'(H^{-1}(t)) phi(H^{-1}(t)).
  double h_phi_inv_second(double t) const;

  std::string describe() const;

 private:
  struct OdeTable;

  double inv_closed_form(double t) const;
  double inv_ode(double t) const;
  double inv_bisect(double t) const;

  RateFunction rate_;
  InverseMethod method_;
  double tolerance_;
  std::shared_ptr<const OdeTable> table_;
};

InverseMethod default_method(const RateFunction& rate);

// Free-function evaluators; these forward to the profile.
inline double phi_eval(const RateProfile& p, double x) { return p.phi(x); }
inline double h_phi(const RateProfile& p, double u) { return p.h_phi(u); }
inline double h_phi_inv(const RateProfile& p, double t) { return p.h_phi_inv(t); }

/// r_*(t) = phi(H^{-1}(t)) at every time; times must be non-decreasing.
std::vector<double> rate_curve(const RateProfile& p, std::span<const double> times);

struct AssumptionOptions {
  /// Tail value of phi(x) - x phi'(x) must exceed head + (factor-1)|head|.
  double growth_factor = 2.0;
};

/// Grid check of the standing assumptions on phi. Requires >= 3 increasing
/// points, all >= 1. The series `phi_minus_x_dphi` holds the gap values.
CheckReport validate_assumptions(const RateProfile& p, std::span<const double> grid,
                                 const AssumptionOptions& opts = {});

/// H^{-1}(s+t) <= H^{-1}(s) H^{-1}(t) (1 + tolerance) for every pair.
CheckReport check_submultiplicative(const RateProfile& p,
                                    std::span<const std::pair<double, double>> pairs);

/// phi(kappa x) <= kappa phi(x) (1 + tolerance) for samples (x, kappa), kappa >= 1.
CheckReport check_scaling(const RateProfile& p,
                          std::span<const std::pair<double, double>> samples);

/// |H^{-1}(H(u)) - u| / u <= rel_tol on the given points.
CheckReport check_round_trip(const RateProfile& p, std::span<const double> points,
                             double rel_tol);

/// Central-difference derivative of H^{-1} against phi(H^{-1}(t)).
CheckReport check_derivative_identity(const RateProfile& p, std::span<const double> times,
                                      double rel_tol = 1e-4);

/// H^{-1}(t) <= e^t.
CheckReport check_growth_envelope(const RateProfile& p, std::span<const double> times);

/// (1/t_k) ln r_*(t_k) at t_k = 2^k, k = k_lo..k_hi, strictly decreasing and
/// positive; series `log_rate_over_t` carries the values.
CheckReport check_subexponential(const RateProfile& p, int k_lo = 3, int k_hi = 20);

}  // namespace subgeo
