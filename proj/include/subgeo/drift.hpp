#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subgeo/models.hpp"
#include "subgeo/rates.hpp"
#include "subgeo/report.hpp"

namespace subgeo {

/// V >= 1, either a vector over chain states or a function on the line.
class LyapunovCandidate {
 public:
  static LyapunovCandidate on_states(std::vector<double> values);
  static LyapunovCandidate function(std::function<double(double)> v, std::string name = "V");

  bool tabulated() const { return fn_ == nullptr; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  /// V(x); for tabulated candidates x is a state index.
  double at(double x) const;
  const std::string& name() const { return name_; }

 private:
  std::vector<double> values_;
  std::function<double(double)> fn_;
  std::string name_;
};

/// (QV)(x) <= -beta V(x) + b 1_C(x) at every state.
CheckReport check_geometric_drift(const Ctmc& m, const LyapunovCandidate& v, const TargetSet& c,
                                  double beta, double b, double tolerance = 1e-12);

struct DriftOptions {
  std::optional<TargetSet> target;  // unset: C = {LV + phi(V) > 0}
  std::optional<double> K;          // unset: K = max over C of LV + phi(V)
  double tolerance = 1e-9;          // absolute, on residuals
  /// Compact bound for an automatic C: states <= max_state (chains) or
  /// points inside max_interval (diffusions).
  std::optional<std::size_t> max_state;
  std::optional<std::pair<double, double>> max_interval;
  /// Diffusions: evaluation grid and finite-difference step.
  std::vector<double> grid;
  double h = 1e-4;
};

/// Outcome of LV <= -phi(V) + K 1_C.
struct DriftCertificate {
  TargetSet target = TargetSet::mask({});
  double K = 0.0;
  std::vector<double> points;     // state indices or grid points
  std::vector<double> generator;  // LV at each point
  std::vector<double> residuals;  // LV + phi(V) - K 1_C
  double tolerance = 0.0;
  bool passed = false;
  CheckReport report;
};

/// Throws AutoTargetError when an automatic C reaches the truncation level
/// (or the last interior grid point) or leaves the compact bound.
DriftCertificate check_subgeometric_drift(const Ctmc& m, const LyapunovCandidate& v,
                                          const RateProfile& p, const DriftOptions& opts = {});
DriftCertificate check_subgeometric_drift(const Diffusion1d& m, const LyapunovCandidate& v,
                                          const RateProfile& p, const DriftOptions& opts);

struct FeasibleExponent {
  double alpha = 0.0;
  DriftCertificate certificate;
};

/// Largest polynomial exponent alpha in [lo, hi] for which the automatic
/// certificate exists and passes (bisection; feasibility is monotone in
/// alpha because V >= 1). Throws AutoTargetError if even `lo` fails.
FeasibleExponent largest_feasible_exponent(const Ctmc& m, const LyapunovCandidate& v,
                                           const DriftOptions& opts, double lo = 0.01,
                                           double hi = 0.99, double tol = 1e-6);

/// Hitting moments tabulated on a time grid: for each (t, x0) the sample
/// mean, variance and covariance of h = H^{-1}(tau~ + t) and
/// d = phi(H^{-1}(tau~ + t)) = d/dt h.
struct MomentCell {
  double h = 0.0, d = 0.0;
  double var_h = 0.0, var_d = 0.0, cov_hd = 0.0;
  std::size_t n = 0;
  double censored_fraction = 0.0;
};

struct MomentTable {
  std::vector<double> times;
  std::vector<std::size_t> states;
  std::vector<MomentCell> cells;  // cells[pos * times.size() + k]
  std::vector<char> in_target;    // per tabulated state
  double r = 0.0;
  double se_multiplier = 3.0;

  const MomentCell& cell(std::size_t k, std::size_t pos) const {
    return cells[pos * times.size() + k];
  }
  std::optional<std::size_t> position(std::size_t state) const;
};

/// Literal: psi = u with u(t,x) = E_x[H^{-1}(tau~ + t)].
/// Corrected: psi = 2u - H^{-1}(t). Off C, (d_t + L)u = 0 exactly, so u
/// alone cannot satisfy the generator inequality there; the corrected form
/// does (see README).
///
/// Constants, with u_sup = max over tabulated C-states of u(0,.) + k SE:
///   Literal:   kappa_sup = u_sup,       kappa_drift = r u_sup
///   Corrected: kappa_sup = 2 u_sup - 1, kappa_drift = 2 r u_sup
/// and eta = phi(1) in both cases.
enum class HittingForm { Literal, Corrected };

/// A time-space function psi(t, x) together with its Condition-2 constants.
class PsiFunction {
 public:
  enum class Source { FromV, FromHitting, Custom };

  static PsiFunction from_v(const LyapunovCandidate& v, const RateProfile& p);
  static PsiFunction from_table(MomentTable table, HittingForm form, const RateProfile& p);
  static PsiFunction custom(std::function<double(double, double)> f, const RateProfile& p,
                            double kappa_sup, double kappa_drift, double eta);

  Source source() const { return source_; }
  HittingForm form() const { return form_; }
  /// psi(t, x); for chains x is a state index.
  double operator()(double t, double x) const;
  /// d/dt psi when known without differencing (FromV with closed-form
  /// H^{-1}, or tabulated moments).
  std::optional<double> time_derivative(double t, double x) const;
  /// Monte-Carlo standard error of psi(t, x) (0 for deterministic sources).
  double std_error(double t, double x) const;

  double kappa_sup() const { return kappa_sup_; }
  double kappa_drift() const { return kappa_drift_; }
  double kappa() const { return std::max(kappa_sup_, kappa_drift_); }
  double eta() const { return eta_; }
  void set_constants(double kappa_sup, double kappa_drift, double eta) {
    kappa_sup_ = kappa_sup;
    kappa_drift_ = kappa_drift;
    eta_ = eta;
  }
  const std::optional<MomentTable>& table() const { return table_; }
  /// Whether psi can be evaluated at chain state x.
  bool covers(std::size_t x) const;

 private:
  PsiFunction(Source s, const RateProfile& p) : source_(s), profile_(p) {}
  std::optional<std::size_t> time_index(double t) const;

  Source source_;
  HittingForm form_ = HittingForm::Corrected;
  RateProfile profile_;
  std::optional<LyapunovCandidate> v_;
  std::function<double(double, double)> fn_;
  std::optional<MomentTable> table_;
  double kappa_sup_ = 0.0, kappa_drift_ = 0.0, eta_ = 0.0;
};

/// psi(t,x) = 2 H^{-1}(H(V(x)) + t) - H^{-1}(t) with kappa_sup = sup_C psi(0,.),
/// kappa_drift = 2K and eta = 2 phi(1). Requires a passed certificate.
PsiFunction build_psi_from_v(const LyapunovCandidate& v, const RateProfile& p,
                             const DriftCertificate& cert);

struct Condition2Options {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double se_multiplier = 3.0;
  int jobs = 1;
};

/// Condition 2 on a t-grid times all states: (d_t + L)psi <= kappa H^{-1}(t) 1_C
/// - phi(H^{-1}(t)), psi >= H^{-1}(t), psi non-decreasing in t, psi(0,.) <= kappa
/// on C and L psi(0,.) <= kappa 1_C - eta. Tabulated psi is checked only at
/// states whose neighbours are all tabulated; t_grid must then be a subset
/// of the table's times.
CheckReport check_condition2(const Ctmc& m, const PsiFunction& psi, const RateProfile& p,
                             const TargetSet& c, std::span<const double> t_grid, double dt,
                             const Condition2Options& opts = {});
/// Diffusion variant on grid points at least h inside the domain.
CheckReport check_condition2(const Diffusion1d& m, const PsiFunction& psi, const RateProfile& p,
                             const TargetSet& c, std::span<const double> t_grid,
                             std::span<const double> x_grid, double h, double dt,
                             const Condition2Options& opts = {});

}  // namespace subgeo
