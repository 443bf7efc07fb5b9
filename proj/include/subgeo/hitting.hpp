#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subgeo/drift.hpp"
#include "subgeo/models.hpp"
#include "subgeo/rates.hpp"
#include "subgeo/report.hpp"
#include "subgeo/rng.hpp"

namespace subgeo {

/// Settings shared by every occupation-clock estimator.
///
/// Path i started at x0 always uses the substream (seed, "path", x0, i) and
/// its exponential clock the substream (seed, "clock", x0, i), so estimators
/// that look at the same (x0, i) see the same path (common random numbers),
/// and results do not depend on `jobs`.
struct HittingSampler {
  std::shared_ptr<const Model> model;
  TargetSet target = TargetSet::mask({});
  double r = 1.0;
  double horizon_cap = 1e4;
  std::uint64_t seed = 0;
  int jobs = 1;
  double censor_threshold = 1e-3;

  HittingSampler() = default;
  HittingSampler(Model m, TargetSet c, double rate, std::uint64_t master_seed);

  Stream path_stream(double x0, std::size_t i) const;
  Stream clock_stream(double x0, std::size_t i) const;
  /// A copy with a different clock rate (same paths and clocks).
  HittingSampler with_r(double rate) const;
};

/// One piece of a path: the state is held (or, for diffusions, the left
/// endpoint is read) on [begin, end).
struct Segment {
  double begin = 0.0;
  double end = 0.0;
  bool in_target = false;
  double state = 0.0;
};

/// Lazily generated segments of a chain or Euler path.
class PathWalker {
 public:
  PathWalker(const Model& m, const TargetSet& c, double x0, Stream rng);
  Segment next();

 private:
  const Model* model_;
  const TargetSet* target_;
  Stream rng_;
  double t_ = 0.0;
  double x_;
};

/// First t with occupation_C(t) >= threshold; nullopt if not reached by cap.
/// Exact on jump paths.
std::optional<double> occupation_clock(const Model& m, const TargetSet& c, double x0,
                                       double threshold, double cap, Stream rng);

/// tau~ = first t with occupation_C(t) >= T / r, T ~ Exp(1) from `clock`.
std::optional<double> sample_randomized_hitting(const HittingSampler& s, double x0,
                                                Stream path, Stream clock);
/// The same with the sampler's substreams for path index i.
std::optional<double> sample_randomized_hitting(const HittingSampler& s, double x0,
                                                std::size_t i);

/// tau~^1 = first t with occupation_C(t) >= 1 / (2 kappa).
std::optional<double> sample_tau1(const Model& m, double x0, const TargetSet& c, double kappa,
                                  Stream path, double cap = 1e4);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double censored_fraction = 0.0;
  bool unreliable = false;
};

/// Mean and SE of H^{-1}(tau~). Censored paths contribute H^{-1}(cap).
MomentEstimate estimate_hitting_moment(const HittingSampler& s, double x0,
                                       const RateProfile& p, std::size_t n_paths);

/// Non-decreasing C^1 test function with f(0) = 0.
struct TestFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  bool constant_derivative = false;  // df is constant (closed-form segments)

  static TestFunction identity();
  static TestFunction one_minus_exp();
  static TestFunction h_inv_minus_one(const RateProfile& p);
  static TestFunction zero();
};

/// E[f(tau~)] against E[int_0^inf e^{-r occ(s)} f'(s) ds] on the same paths.
/// Passes when |left - right| <= k * SE of the paired difference. Constants:
/// left, right, left_se, right_se, diff_se, censored_fraction.
CheckReport occupation_identity_check(const HittingSampler& s, double x0, const TestFunction& f,
                                      std::size_t n_paths, double se_multiplier = 3.0);
/// The same for several test functions on one set of paths (one report each).
std::vector<CheckReport> occupation_identity_checks(const HittingSampler& s, double x0,
                                                    std::span<const TestFunction> fs,
                                                    std::size_t n_paths, double se_multiplier = 3.0);

/// Tabulate u(t, x) = E_x[H^{-1}(tau~ + t)] and d/dt u on t_grid x states,
/// then wrap it as a PsiFunction of the requested form. Throws
/// UnreliableEstimateError if any C-cell is censored above the threshold.
PsiFunction psi_via_hitting(const HittingSampler& s, const RateProfile& p,
                            std::span<const double> t_grid, std::span<const std::size_t> states,
                            std::size_t n_paths, HittingForm form = HittingForm::Corrected);

/// E_x[H^{-1}(tau~^1)] <= 2 psi(0,x) at each state, tau~^1 built with psi.kappa().
CheckReport check_step1_bound(const HittingSampler& s, const PsiFunction& psi,
                              const RateProfile& p, std::span<const double> states,
                              std::size_t n_paths, double se_multiplier = 3.0);

/// A_{x,rho,r} = E_x[int_0^inf e^{-r occ(s)} (H^{-1})'(s) e^{-rho s^2} ds] with
/// r taken from the sampler. With rho > 0 the tail past s_horizon is bounded
/// analytically (TailBoundError if it exceeds tail_tol); with rho = 0 a path
/// whose integrand is still significant at s_horizon counts as censored.
MomentEstimate estimate_A_functional(const HittingSampler& s, double x0, double rho,
                                     const RateProfile& p, std::size_t n_paths,
                                     double s_horizon, double tail_tol = 1e-8);

struct Calibration {
  double r0 = 0.0;         // 2 kappa ln(4 kappa)
  double tightened = 0.0;  // smallest r at which the estimated gate still holds
  CheckReport report;
};

/// r0 = 2 kappa ln(4 kappa), then the Monte-Carlo check
/// sup_C e^{-r0/(2 kappa)} E_x[H^{-1}(tau~^1)] <= 1/2 + k SE.
Calibration calibrate_r(const HittingSampler& s, const PsiFunction& psi, const RateProfile& p,
                        std::size_t n_paths, double se_multiplier = 3.0);

/// tau_C(delta) = inf{t >= delta : X_t in C}; nullopt if not reached by cap.
std::optional<double> sample_tau_delta(const Model& m, const TargetSet& c, double x0,
                                       double delta, double cap, Stream path);

/// E_x[H^{-1}(tau_C(delta)) - 1] <= psi(0,x) + kappa delta H^{-1}(delta) + k SE.
/// (The left side is int_0^{tau} phi(H^{-1}(s)) ds in closed form.)
CheckReport check_tau_delta_bound(const HittingSampler& s, double x0, const PsiFunction& psi,
                                  const RateProfile& p, double delta, std::size_t n_paths,
                                  double se_multiplier = 3.0);

}  // namespace subgeo
