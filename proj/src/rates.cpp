#include "subgeo/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "subgeo/errors.hpp"

namespace subgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// exp() overflows past ~709.78; the table stops before that.
constexpr double kMaxLogValue = 700.0;

void require_domain(double x, const char* what) {
  if (!(x >= 1.0)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s: argument %.17g is below the domain floor 1", what, x);
    throw DomainError(buf);
  }
}

struct HermiteTable {
  std::vector<double> x, f, df;

  void validate() const {
    if (x.size() < 2 || f.size() != x.size() || df.size() != x.size())
      throw DimensionError("tabulated rate needs >= 2 knots with matching arrays");
    if (x.front() != 1.0) throw DomainError("tabulated rate must start at x = 1");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw DomainError("tabulated rate knots must increase");
  }

  // Cubic Hermite piece; linear continuation beyond the last knot.
  std::pair<double, double> eval(double v) const {
    if (v >= x.back()) return {f.back() + df.back() * (v - x.back()), df.back()};
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double h = x[i + 1] - x[i];
    const double s = (v - x[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double value = (2 * s3 - 3 * s2 + 1) * f[i] + (s3 - 2 * s2 + s) * h * df[i] +
                         (-2 * s3 + 3 * s2) * f[i + 1] + (s3 - s2) * h * df[i + 1];
    const double slope = ((6 * s2 - 6 * s) * f[i] + (3 * s2 - 4 * s + 1) * h * df[i] +
                          (-6 * s2 + 6 * s) * f[i + 1] + (3 * s2 - 2 * s) * h * df[i + 1]) /
                         h;
    return {value, slope};
  }
};

}  // namespace

// ---------------------------------------------------------------- RateFunction

RateFunction RateFunction::polynomial(double alpha, double scale) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("polynomial rate: alpha must lie in (0, 1)");
  if (!(scale > 0.0)) throw std::invalid_argument("polynomial rate: scale must be > 0");
  RateFunction r;
  r.kind_ = RateKind::Polynomial;
  r.alpha_ = alpha;
  r.scale_ = scale;
  r.name_ = "polynomial";
  return r;
}

RateFunction RateFunction::log_smoothed() {
  RateFunction r;
  r.kind_ = RateKind::LogSmoothed;
  r.name_ = "log_smoothed";
  return r;
}

RateFunction RateFunction::custom(std::string name, std::function<double(double)> phi,
                                  std::function<double(double)> dphi) {
  if (!phi || !dphi) throw std::invalid_argument("custom rate needs phi and phi'");
  RateFunction r;
  r.kind_ = RateKind::Custom;
  r.name_ = std::move(name);
  r.phi_ = std::move(phi);
  r.dphi_ = std::move(dphi);
  return r;
}

RateFunction RateFunction::tabulated(std::vector<double> x, std::vector<double> phi,
                                     std::vector<double> dphi) {
  auto table = std::make_shared<HermiteTable>(
      HermiteTable{std::move(x), std::move(phi), std::move(dphi)});
  table->validate();
  return custom(
      "tabulated", [table](double v) { return table->eval(v).first; },
      [table](double v) { return table->eval(v).second; });
}

double RateFunction::operator()(double x) const {
  require_domain(x, "phi");
  switch (kind_) {
    case RateKind::Polynomial:
      return scale_ * std::pow(x, alpha_);
    case RateKind::LogSmoothed:
      return 1.0 + std::log(x);
    case RateKind::Custom:
      return phi_(x);
  }
  return 0.0;
}

double RateFunction::derivative(double x) const {
  require_domain(x, "phi'");
  switch (kind_) {
    case RateKind::Polynomial:
      return scale_ * alpha_ * std::pow(x, alpha_ - 1.0);
    case RateKind::LogSmoothed:
      return 1.0 / x;
    case RateKind::Custom:
      return dphi_(x);
  }
  return 0.0;
}

std::string RateFunction::describe() const {
  char buf[128];
  switch (kind_) {
    case RateKind::Polynomial:
      std::snprintf(buf, sizeof buf, "polynomial(alpha=%.17g,scale=%.17g)", alpha_, scale_);
      return buf;
    case RateKind::LogSmoothed:
      return "log_smoothed";
    case RateKind::Custom:
      return "custom(" + name_ + ")";
  }
  return {};
}

const char* to_string(InverseMethod m) {
  switch (m) {
    case InverseMethod::ClosedForm:
      return "closed_form";
    case InverseMethod::OdeIntegrate:
      return "ode_integrate";
    case InverseMethod::BisectOnQuadrature:
      return "bisect_on_quadrature";
  }
  return "?";
}

InverseMethod default_method(const RateFunction& rate) {
  return rate.kind() == RateKind::Polynomial ? InverseMethod::ClosedForm
                                             : InverseMethod::OdeIntegrate;
}

// ----------------------------------------------------------------- RateProfile

// g(t) = ln H^{-1}(t) solves g' = phi(e^g) e^{-g}, g(0) = 0. Working in log
// form keeps relative accuracy uniform while H^{-1} grows by many decades.
struct RateProfile::OdeTable {
  numerics::QuinticHermite spline;
  numerics::OdeTolerance tol;
  std::function<double(double)> slope;
  double end_t = 0.0;
  double end_g = 0.0;
  bool saturated = false;  // stopped because g reached kMaxLogValue
};

RateProfile::RateProfile(RateFunction rate) : RateProfile(rate, default_method(rate)) {}

RateProfile::RateProfile(RateFunction rate, InverseMethod method, double tolerance,
                         double cache_horizon)
    : rate_(std::move(rate)), method_(method), tolerance_(tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (method_ == InverseMethod::ClosedForm && rate_.kind() != RateKind::Polynomial)
    throw std::invalid_argument("closed-form H^{-1} exists only for the polynomial rate");
  if (method_ != InverseMethod::OdeIntegrate) return;

  auto table = std::make_shared<OdeTable>();
  const RateFunction phi = rate_;
  // Clamped so trial stages past the overflow point stay finite.
  table->slope = [phi](double g) {
    const double y = std::exp(std::min(g, kMaxLogValue));
    return phi(y) / y;
  };
  const double eps = std::min(1e-12, tolerance * 1e-4);
  table->tol = numerics::OdeTolerance{eps, eps * 0.1, 1.0e300};

  std::vector<double> ts{0.0}, gs{0.0}, d1, d2;
  auto derivs = [&](double g) {
    const double y = std::exp(std::min(g, kMaxLogValue));
    const double p = phi(y);
    d1.push_back(p / y);
    d2.push_back(p * (y * phi.derivative(y) - p) / (y * y));
  };
  derivs(0.0);
  // Integrate in chunks so the table can stop once exp(g) nears overflow.
  double t = 0.0, g = 0.0;
  const double chunk = std::max(1.0, cache_horizon / 64.0);
  while (t < cache_horizon && g < kMaxLogValue) {
    const double t_next = std::min(cache_horizon, t + chunk);
    bool stop = false;
    g = numerics::dormand_prince(table->slope, t, g, t_next, table->tol,
                                 [&](double ts_, double gs_) {
                                   if (stop) return;
                                   ts.push_back(ts_);
                                   gs.push_back(gs_);
                                   derivs(gs_);
                                   if (gs_ >= kMaxLogValue) stop = true;
                                 });
    t = t_next;
    if (stop) {
      table->saturated = true;
      break;
    }
  }
  table->end_t = ts.back();
  table->end_g = gs.back();
  table->spline = numerics::QuinticHermite(std::move(ts), std::move(gs), std::move(d1),
                                           std::move(d2));
  table_ = std::move(table);
}

double RateProfile::h_phi(double u) const {
  require_domain(u, "H_phi");
  if (u == 1.0) return 0.0;
  if (rate_.kind() == RateKind::Polynomial) {
    const double a = rate_.alpha();
    return std::expm1((1.0 - a) * std::log(u)) / ((1.0 - a) * rate_.scale());
  }
  return h_phi_quadrature(u);
}

double RateProfile::h_phi_quadrature(double u) const {
  require_domain(u, "H_phi");
  if (u == 1.0) return 0.0;
  if (std::isinf(u)) return kInf;
  // Substituting s = e^w makes the integrand smooth over many decades of u.
  auto integrand = [this](double w) {
    const double s = std::exp(w);
    return s / rate_(s);
  };
  const double rel = std::min(1e-12, tolerance_ * 1e-4);
  return numerics::integrate(integrand, 0.0, std::log(u), 1e-300, rel, 5000).value;
}

double RateProfile::h_phi_inv(double t) const {
  if (!(t >= 0.0)) throw DomainError("H_phi^{-1}: time must be >= 0");
  if (t == 0.0) return 1.0;
  switch (method_) {
    case InverseMethod::ClosedForm:
      return inv_closed_form(t);
    case InverseMethod::OdeIntegrate:
      return inv_ode(t);
    case InverseMethod::BisectOnQuadrature:
      return inv_bisect(t);
  }
  return 0.0;
}

double RateProfile::h_phi_inv_second(double t) const {
  const double y = h_phi_inv(t);
  return rate_.derivative(y) * rate_(y);
}

double RateProfile::inv_closed_form(double t) const {
  const double a = rate_.alpha();
  return std::exp(std::log1p((1.0 - a) * rate_.scale() * t) / (1.0 - a));
}

double RateProfile::inv_ode(double t) const {
  const OdeTable& tab = *table_;
  if (t <= tab.end_t) return std::exp(tab.spline(t));
  if (tab.saturated) return kInf;
  // Past the table: integrate from the last knot without touching the cache.
  double result_g = tab.end_g;
  bool overflow = false;
  result_g = numerics::dormand_prince(tab.slope, tab.end_t, tab.end_g, t, tab.tol,
                                      [&](double, double g) {
                                        if (g >= kMaxLogValue) overflow = true;
                                      });
  if (overflow) return kInf;
  return std::exp(result_g);
}

double RateProfile::inv_bisect(double t) const {
  double lo = 1.0, hi = 2.0;
  while (h_phi_quadrature(hi) < t) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return kInf;
  }
  return numerics::bisect_increasing([this](double u) { return h_phi_quadrature(u); }, t,
                                     lo, hi, 1e-15);
}

std::string RateProfile::describe() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, ";method=%s;tolerance=%.3g", to_string(method_), tolerance_);
  return rate_.describe() + buf;
}

// --------------------------------------------------------------------- checks

std::vector<double> rate_curve(const RateProfile& p, std::span<const double> times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && times[i] < times[i - 1])
      throw std::invalid_argument("rate_curve: times must be non-decreasing");
    out.push_back(p.rate(times[i]));
  }
  return out;
}

CheckReport validate_assumptions(const RateProfile& p, std::span<const double> grid,
                                 const AssumptionOptions& opts) {
  if (grid.size() < 3) throw std::invalid_argument("validate_assumptions: need >= 3 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require_domain(grid[i], "validate_assumptions");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument("validate_assumptions: grid must be increasing");
  }
  CheckReport rep("rate_assumptions");
  const std::size_t n = grid.size();
  std::vector<double> f(n), gap(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = p.phi(grid[i]);
    gap[i] = f[i] - grid[i] * p.dphi(grid[i]);
  }
  rep.require_lt("phi_positive", {grid[0]}, 0.0, f[0]);
  for (std::size_t i = 0; i < n; ++i) rep.require_le("phi_le_x", {grid[i]}, f[i], grid[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    rep.require_lt("strictly_increasing", {grid[i], grid[i + 1]}, f[i], f[i + 1]);
    rep.require_lt("ratio_decreasing", {grid[i], grid[i + 1]}, f[i + 1] / grid[i + 1],
                   f[i] / grid[i]);
    const double scale = std::max({1.0, std::abs(gap[i]), std::abs(gap[i + 1])});
    rep.require_le("gap_nondecreasing", {grid[i], grid[i + 1]}, gap[i], gap[i + 1],
                   1e-12 * scale);
  }
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const double left = (f[i + 1] - f[i]) / (grid[i + 1] - grid[i]);
    const double right = (f[i + 2] - f[i + 1]) / (grid[i + 2] - grid[i + 1]);
    rep.require_lt("secant_concave", {grid[i], grid[i + 1], grid[i + 2]}, right, left);
  }
  const double head = gap.front();
  const double floor = head + (opts.growth_factor - 1.0) * std::abs(head);
  rep.require_lt("gap_growth_floor", {grid.front(), grid.back()}, floor, gap.back());
  rep.set_series("phi_minus_x_dphi", gap);
  return rep;
}

CheckReport check_submultiplicative(const RateProfile& p,
                                    std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw std::invalid_argument("check_submultiplicative: no pairs");
  CheckReport rep("submultiplicative");
  double worst_ratio = 0.0;
  for (const auto& [s, t] : pairs) {
    const double lhs = p.h_phi_inv(s + t);
    const double prod = p.h_phi_inv(s) * p.h_phi_inv(t);
    worst_ratio = std::max(worst_ratio, lhs / prod);
    rep.require_le("h_inv_submultiplicative", {s, t}, lhs, prod * (1.0 + p.tolerance()));
  }
  rep.set_constant("max_ratio", worst_ratio);
  return rep;
}

CheckReport check_scaling(const RateProfile& p,
                          std::span<const std::pair<double, double>> samples) {
  if (samples.empty()) throw std::invalid_argument("check_scaling: no samples");
  CheckReport rep("scaling");
  for (const auto& [x, kappa] : samples) {
    if (!(kappa >= 1.0)) throw DomainError("check_scaling: kappa must be >= 1");
    const double lhs = p.phi(kappa * x);
    const double rhs = kappa * p.phi(x);
    rep.require_le("phi_scaling", {x, kappa}, lhs, rhs * (1.0 + p.tolerance()));
  }
  return rep;
}

CheckReport check_round_trip(const RateProfile& p, std::span<const double> points,
                             double rel_tol) {
  CheckReport rep("round_trip");
  double worst = 0.0;
  for (double u : points) {
    const double back = p.h_phi_inv(p.h_phi(u));
    const double err = std::abs(back - u) / u;
    worst = std::max(worst, err);
    rep.require_le("h_inv_of_h", {u}, err, rel_tol);
  }
  rep.set_constant("max_relative_error", worst);
  return rep;
}

CheckReport check_derivative_identity(const RateProfile& p, std::span<const double> times,
                                      double rel_tol) {
  CheckReport rep("derivative_identity");
  for (double t : times) {
    const double h = 1e-4 * std::max(1.0, t);
    double fd;
    if (t - h < 0.0) {
      // second-order forward difference near the origin
      fd = (-3.0 * p.h_phi_inv(t) + 4.0 * p.h_phi_inv(t + h) - p.h_phi_inv(t + 2 * h)) /
           (2 * h);
    } else {
      fd = (p.h_phi_inv(t + h) - p.h_phi_inv(t - h)) / (2 * h);
    }
    const double exact = p.rate(t);
    rep.require_le("fd_derivative", {t}, std::abs(fd - exact) / exact, rel_tol);
  }
  return rep;
}

CheckReport check_growth_envelope(const RateProfile& p, std::span<const double> times) {
  CheckReport rep("growth_envelope");
  for (double t : times) {
    // compare in log space so large t does not overflow e^t
    rep.require_le("h_inv_le_exp", {t}, std::log(p.h_phi_inv(t)), t, 1e-12 * (1.0 + t));
  }
  return rep;
}

CheckReport check_subexponential(const RateProfile& p, int k_lo, int k_hi) {
  CheckReport rep("subexponential_rate");
  std::vector<double> values;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double t = std::ldexp(1.0, k);
    values.push_back(std::log(p.rate(t)) / t);
  }
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    rep.require_lt("log_rate_over_t_decreasing",
                   {std::ldexp(1.0, k_lo + static_cast<int>(i))}, values[i + 1], values[i]);
  }
  rep.require_lt("approaches_zero", {std::ldexp(1.0, k_hi)}, std::abs(values.back()),
                 std::abs(values.front()));
  rep.set_series("log_rate_over_t", values);
  return rep;
}

}  // namespace subgeo
