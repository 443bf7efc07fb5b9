#include "subgeo/hitting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "subgeo/errors.hpp"
#include "subgeo/numerics.hpp"
#include "subgeo/parallel.hpp"

namespace subgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Paths stop contributing once the discount e^{-r occ} has eaten this many
// nats beyond the growth of the integrand.
constexpr double kCutoffNats = 36.0;

void validate_x0(const Model& m, double x0) {
  if (const auto* ch = std::get_if<Ctmc>(&m)) {
    if (x0 < 0 || x0 != std::floor(x0) || x0 >= static_cast<double>(ch->size()))
      throw DimensionError("x0 is not a state of the chain");
  } else {
    const auto& d = std::get<Diffusion1d>(m);
    if (x0 < d.lo || x0 > d.hi) throw DomainError("x0 is outside the diffusion domain");
  }
}

std::uint64_t key(double x0) { return std::bit_cast<std::uint64_t>(x0); }

/// int_a^b g. Euler steps are short and the integrands smooth, so a
/// 5-point Gauss-Legendre rule is exact to rounding there.
template <class G>
double segment_integral(G&& g, double a, double b, bool smooth = true) {
  if (!(b > a)) return 0.0;
  if (smooth && b - a <= 0.05) {
    static constexpr double x[] = {0.0, 0.5384693101056831, 0.9061798459386640};
    static constexpr double w[] = {0.5688888888888889, 0.4786286704993665,
                                   0.2369268850561891};
    const double m = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = w[0] * g(m);
    for (int k = 1; k < 3; ++k) s += w[k] * (g(m - h * x[k]) + g(m + h * x[k]));
    return h * s;
  }
  return numerics::integrate(g, a, b, 1e-15, 1e-11, 4000).value;
}

MomentEstimate finish(const std::vector<double>& values, std::size_t censored,
                      double threshold) {
  const auto s = summarize(values);
  MomentEstimate e;
  e.mean = s.mean;
  e.std_error = s.std_error;
  e.n_paths = s.n;
  e.censored_fraction = s.n ? static_cast<double>(censored) / static_cast<double>(s.n) : 0.0;
  e.unreliable = e.censored_fraction > threshold;
  return e;
}

struct Flagged {
  double value = 0.0;
  bool censored = false;
};

MomentEstimate finish(const std::vector<Flagged>& v, double threshold) {
  std::vector<double> values(v.size());
  std::size_t censored = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    values[i] = v[i].value;
    censored += v[i].censored;
  }
  return finish(values, censored, threshold);
}

}  // namespace

// ---------------------------------------------------------------- sampler

HittingSampler::HittingSampler(Model m, TargetSet c, double rate, std::uint64_t master_seed)
    : model(std::make_shared<const Model>(std::move(m))),
      target(std::move(c)),
      r(rate),
      seed(master_seed) {
  if (!(r > 0.0)) throw std::invalid_argument("HittingSampler: r must be > 0");
}

Stream HittingSampler::path_stream(double x0, std::size_t i) const {
  return Stream(seed, stream_tag("path"), key(x0), i);
}

Stream HittingSampler::clock_stream(double x0, std::size_t i) const {
  return Stream(seed, stream_tag("clock"), key(x0), i);
}

HittingSampler HittingSampler::with_r(double rate) const {
  if (!(rate > 0.0)) throw std::invalid_argument("HittingSampler: r must be > 0");
  HittingSampler s = *this;
  s.r = rate;
  return s;
}

// ----------------------------------------------------------------- walker

PathWalker::PathWalker(const Model& m, const TargetSet& c, double x0, Stream rng)
    : model_(&m), target_(&c), rng_(rng), x_(x0) {
  validate_x0(m, x0);
}

Segment PathWalker::next() {
  Segment s;
  s.begin = t_;
  s.state = x_;
  if (const auto* ch = std::get_if<Ctmc>(model_)) {
    const auto i = static_cast<std::size_t>(x_);
    s.in_target = target_->contains(i);
    const double exit = ch->exit_rate(i);
    if (exit == 0.0) {
      s.end = kInf;
    } else {
      s.end = t_ + rng_.exponential() / exit;
      x_ = static_cast<double>(ch->jump_target(i, rng_.uniform()));
    }
    t_ = s.end;
    return s;
  }
  const auto& d = std::get<Diffusion1d>(*model_);
  s.in_target = target_->contains(x_);
  // Times are rebuilt from the step count so they do not drift.
  const double k = std::round(t_ / d.step);
  s.begin = k * d.step;
  s.end = (k + 1) * d.step;
  x_ = d.euler_step(x_, d.step, rng_.normal());
  t_ = s.end;
  return s;
}

std::optional<double> occupation_clock(const Model& m, const TargetSet& c, double x0,
                                       double threshold, double cap, Stream rng) {
  if (threshold <= 0.0) return 0.0;
  PathWalker w(m, c, x0, rng);
  double occ = 0.0;
  for (;;) {
    const Segment s = w.next();
    if (s.begin >= cap) return std::nullopt;
    if (!s.in_target) continue;
    const double len = s.end - s.begin;
    if (occ + len >= threshold) {
      const double t = s.begin + (threshold - occ);
      if (t > cap) return std::nullopt;
      return t;
    }
    occ += len;
  }
}

std::optional<double> sample_randomized_hitting(const HittingSampler& s, double x0,
                                                Stream path, Stream clock) {
  const double T = clock.exponential();
  return occupation_clock(*s.model, s.target, x0, T / s.r, s.horizon_cap, path);
}

std::optional<double> sample_randomized_hitting(const HittingSampler& s, double x0,
                                                std::size_t i) {
  return sample_randomized_hitting(s, x0, s.path_stream(x0, i), s.clock_stream(x0, i));
}

std::optional<double> sample_tau1(const Model& m, double x0, const TargetSet& c, double kappa,
                                  Stream path, double cap) {
  if (!(kappa > 0.0)) throw std::invalid_argument("sample_tau1: kappa must be > 0");
  return occupation_clock(m, c, x0, 1.0 / (2.0 * kappa), cap, path);
}

MomentEstimate estimate_hitting_moment(const HittingSampler& s, double x0,
                                       const RateProfile& p, std::size_t n_paths) {
  if (n_paths < 100) throw std::invalid_argument("estimate_hitting_moment: need >= 100 paths");
  validate_x0(*s.model, x0);
  const auto v = map_paths(n_paths, s.jobs, [&](std::size_t i) {
    const auto tau = sample_randomized_hitting(s, x0, i);
    return tau ? Flagged{p.h_phi_inv(*tau), false} : Flagged{p.h_phi_inv(s.horizon_cap), true};
  });
  return finish(v, s.censor_threshold);
}

// ------------------------------------------------------- test functions

TestFunction TestFunction::identity() {
  return {"s", [](double s) { return s; }, [](double) { return 1.0; }, true};
}

TestFunction TestFunction::one_minus_exp() {
  return {"1-exp(-s)", [](double s) { return -std::expm1(-s); },
          [](double s) { return std::exp(-s); }, false};
}

TestFunction TestFunction::h_inv_minus_one(const RateProfile& p) {
  return {"Hinv(s)-1", [p](double s) { return p.h_phi_inv(s) - 1.0; },
          [p](double s) { return p.rate(s); }, false};
}

TestFunction TestFunction::zero() {
  return {"0", [](double) { return 0.0; }, [](double) { return 0.0; }, true};
}

// ------------------------------------------------------ identity check

namespace {

// One path serves every test function: tau~ is shared, and each right-side
// integral stops at its own cutoff.
struct IdentitySample {
  std::vector<double> left, right;
  std::vector<char> left_censored, right_censored;
};

// The right side is stopped once e^{-r occ} (1 + f(2b + 10)) < e^{-20}; the
// neglected tail is below that in expectation, far under any standard error.
constexpr double kIdentityCutoffNats = 20.0;

IdentitySample identity_path(const HittingSampler& s, double x0,
                             std::span<const TestFunction> fs, std::size_t i) {
  const double r = s.r;
  const double threshold = s.clock_stream(x0, i).exponential() / r;
  PathWalker w(*s.model, s.target, x0, s.path_stream(x0, i));
  const std::size_t nf = fs.size();
  IdentitySample out{std::vector<double>(nf, 0.0), std::vector<double>(nf, 0.0),
                     std::vector<char>(nf, 0), std::vector<char>(nf, 0)};
  std::vector<char> done(nf, 0);
  std::size_t open = nf;
  double occ = 0.0;
  bool left_done = false;
  const double cap = s.horizon_cap;

  // Consecutive segments with the same membership form one run; the right
  // side is integrated once per run (Euler paths have many short steps).
  bool have_run = false, run_in = false;
  double run_a = 0.0, run_occ = 0.0;
  const auto flush = [&](std::size_t k, double b) {
    const auto& f = fs[k];
    const double disc = std::exp(-r * run_occ);
    if (!run_in) {
      out.right[k] += disc * (f.f(b) - f.f(run_a));
      return;
    }
    const double u_max = std::min(b - run_a, 60.0 / r);
    if (f.constant_derivative) {
      out.right[k] += disc * f.df(0.0) * (-std::expm1(-r * u_max)) / r;
    } else {
      const double a = run_a;
      out.right[k] += disc * segment_integral(
                                 [&](double u) { return std::exp(-r * u) * f.df(a + u); }, 0.0, u_max);
    }
  };
  const auto flush_open = [&](double b) {
    if (have_run)
      for (std::size_t k = 0; k < nf; ++k)
        if (!done[k]) flush(k, b);
    have_run = false;
  };

  for (;;) {
    const Segment seg = w.next();
    if (seg.begin >= cap) {
      flush_open(cap);
      for (std::size_t k = 0; k < nf; ++k) {
        if (!left_done) {
          out.left[k] = fs[k].f(cap);
          out.left_censored[k] = 1;
        }
        if (!done[k]) out.right_censored[k] = 1;
      }
      return out;
    }
    const double b = std::min(seg.end, cap);
    if (have_run && seg.in_target != run_in) flush_open(seg.begin);
    if (!have_run) {
      have_run = true;
      run_in = seg.in_target;
      run_a = seg.begin;
      run_occ = occ;
    }
    if (seg.in_target) {
      if (!left_done && occ + (seg.end - seg.begin) >= threshold) {
        const double tau = seg.begin + (threshold - occ);
        for (std::size_t k = 0; k < nf; ++k) out.left[k] = fs[k].f(tau);
        left_done = true;
      }
      occ += b - seg.begin;
    }
    if (left_done && r * occ >= kIdentityCutoffNats) {
      for (std::size_t k = 0; k < nf; ++k) {
        if (done[k]) continue;
        if (r * occ - std::log1p(std::max(0.0, fs[k].f(2 * b + 10))) < kIdentityCutoffNats)
          continue;
        flush(k, b);
        done[k] = 1;
        --open;
      }
      if (open == 0) return out;
    }
  }
}

}  // namespace

std::vector<CheckReport> occupation_identity_checks(const HittingSampler& s, double x0,
                                                    std::span<const TestFunction> fs,
                                                    std::size_t n_paths, double se_multiplier) {
  if (n_paths < 2) throw std::invalid_argument("occupation_identity_check: need >= 2 paths");
  validate_x0(*s.model, x0);
  const auto v =
      map_paths(n_paths, s.jobs, [&](std::size_t i) { return identity_path(s, x0, fs, i); });
  std::vector<CheckReport> reps;
  std::vector<double> left(n_paths), right(n_paths), diff(n_paths);
  for (std::size_t k = 0; k < fs.size(); ++k) {
    std::size_t censored = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
      left[i] = v[i].left[k];
      right[i] = v[i].right[k];
      diff[i] = left[i] - right[i];
      censored += v[i].left_censored[k] || v[i].right_censored[k];
    }
    const auto sl = summarize(left), sr = summarize(right), sd = summarize(diff);
    CheckReport rep("occupation_identity[" + fs[k].name + "]");
    rep.require_le("|E f(tau)-E int e^{-r occ} f'|<=k*SE", {x0, s.r}, std::abs(sd.mean),
                   se_multiplier * sd.std_error, 1e-14 * (std::abs(sl.mean) + std::abs(sr.mean)));
    rep.set_constant("left", sl.mean);
    rep.set_constant("right", sr.mean);
    rep.set_constant("left_se", sl.std_error);
    rep.set_constant("right_se", sr.std_error);
    rep.set_constant("diff_se", sd.std_error);
    const double frac = static_cast<double>(censored) / static_cast<double>(n_paths);
    rep.set_constant("censored_fraction", frac);
    if (frac > s.censor_threshold)
      rep.mark_unreliable("censored fraction " + std::to_string(frac) + " above threshold");
    reps.push_back(std::move(rep));
  }
  return reps;
}

CheckReport occupation_identity_check(const HittingSampler& s, double x0, const TestFunction& f,
                                      std::size_t n_paths, double se_multiplier) {
  return occupation_identity_checks(s, x0, std::span<const TestFunction>(&f, 1), n_paths,
                                    se_multiplier)
      .front();
}

// ------------------------------------------------------ psi via hitting

PsiFunction psi_via_hitting(const HittingSampler& s, const RateProfile& p,
                            std::span<const double> t_grid, std::span<const std::size_t> states,
                            std::size_t n_paths, HittingForm form) {
  if (!std::holds_alternative<Ctmc>(*s.model))
    throw std::invalid_argument("psi_via_hitting: chains only");
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw std::invalid_argument("psi_via_hitting: t-grid must start at 0");
  if (n_paths < 2) throw std::invalid_argument("psi_via_hitting: need >= 2 paths");
  MomentTable table;
  table.times.assign(t_grid.begin(), t_grid.end());
  table.states.assign(states.begin(), states.end());
  table.r = s.r;
  table.cells.resize(table.times.size() * table.states.size());
  const auto nd = static_cast<double>(n_paths);
  for (std::size_t pos = 0; pos < states.size(); ++pos) {
    const double x0 = static_cast<double>(states[pos]);
    validate_x0(*s.model, x0);
    table.in_target.push_back(s.target.contains(states[pos]));
    const auto taus = map_paths(n_paths, s.jobs, [&](std::size_t i) {
      const auto tau = sample_randomized_hitting(s, x0, i);
      return tau ? Flagged{*tau, false} : Flagged{s.horizon_cap, true};
    });
    std::size_t censored = 0;
    for (const auto& t : taus) censored += t.censored;
    const double frac = static_cast<double>(censored) / nd;
    if (table.in_target.back() && frac > s.censor_threshold)
      throw UnreliableEstimateError("psi_via_hitting: state " + std::to_string(states[pos]) +
                                    " in C is censored on " + std::to_string(frac) +
                                    " of paths");
    const auto cells = map_paths(table.times.size(), s.jobs, [&](std::size_t k) {
      const double t = table.times[k];
      std::vector<double> h(n_paths), d(n_paths);
      for (std::size_t i = 0; i < n_paths; ++i) {
        h[i] = p.h_phi_inv(taus[i].value + t);
        d[i] = p.phi(h[i]);
      }
      const auto sh = summarize(h), sd = summarize(d);
      double cov = 0.0;
      for (std::size_t i = 0; i < n_paths; ++i) cov += (h[i] - sh.mean) * (d[i] - sd.mean);
      MomentCell c;
      c.h = sh.mean;
      c.d = sd.mean;
      c.var_h = sh.variance;
      c.var_d = sd.variance;
      c.cov_hd = cov / (nd - 1.0);
      c.n = n_paths;
      c.censored_fraction = frac;
      return c;
    });
    std::copy(cells.begin(), cells.end(),
              table.cells.begin() + static_cast<std::ptrdiff_t>(pos * table.times.size()));
  }
  return PsiFunction::from_table(std::move(table), form, p);
}

// ----------------------------------------------------------- step bounds

CheckReport check_step1_bound(const HittingSampler& s, const PsiFunction& psi,
                              const RateProfile& p, std::span<const double> states,
                              std::size_t n_paths, double se_multiplier) {
  const double kappa = psi.kappa();
  CheckReport rep("step1_bound");
  std::vector<double> means, ses, bounds;
  double worst_censored = 0.0;
  for (double x0 : states) {
    validate_x0(*s.model, x0);
    const auto v = map_paths(n_paths, s.jobs, [&](std::size_t i) {
      const auto tau = sample_tau1(*s.model, x0, s.target, kappa, s.path_stream(x0, i),
                                   s.horizon_cap);
      return tau ? Flagged{p.h_phi_inv(*tau), false} : Flagged{p.h_phi_inv(s.horizon_cap), true};
    });
    const auto e = finish(v, s.censor_threshold);
    const double bound = 2.0 * psi(0.0, x0);
    const double se = std::sqrt(e.std_error * e.std_error +
                                4.0 * psi.std_error(0.0, x0) * psi.std_error(0.0, x0));
    rep.require_le("E[Hinv(tau1)]<=2psi(0,x)", {x0}, e.mean, bound, se_multiplier * se);
    means.push_back(e.mean);
    ses.push_back(e.std_error);
    bounds.push_back(bound);
    worst_censored = std::max(worst_censored, e.censored_fraction);
  }
  rep.set_series("mean", means);
  rep.set_series("std_error", ses);
  rep.set_series("bound", bounds);
  rep.set_constant("kappa", kappa);
  rep.set_constant("censored_fraction", worst_censored);
  if (worst_censored > s.censor_threshold) rep.mark_unreliable("tau1 censored above threshold");
  return rep;
}

namespace {

/// log of phi(1) * int_S^inf e^{s - rho s^2} ds.
double log_gaussian_tail(double phi1, double rho, double S) {
  const double z = std::sqrt(rho) * (S - 0.5 / rho);
  const double lerfc = z > 26.0 ? -z * z - std::log(z * std::sqrt(M_PI)) : std::log(std::erfc(z));
  return std::log(phi1) + 0.25 / rho + std::log(0.5 * std::sqrt(M_PI / rho)) + lerfc;
}

Flagged a_functional_path(const HittingSampler& s, double x0, double rho, const RateProfile& p,
                          double S, std::size_t i) {
  const double r = s.r;
  PathWalker w(*s.model, s.target, x0, s.path_stream(x0, i));
  auto weight = [&](double u) { return p.rate(u) * std::exp(-rho * u * u); };
  double occ = 0.0, acc = 0.0;
  for (;;) {
    const Segment seg = w.next();
    if (seg.begin >= S) return {acc, rho == 0.0};
    const double b = std::min(seg.end, S);
    const double a = seg.begin;
    const double disc = std::exp(-r * occ);
    if (seg.in_target) {
      const double u_max = std::min(b - a, 60.0 / r);
      acc += disc * segment_integral([&](double u) { return std::exp(-r * u) * weight(a + u); },
                                     0.0, u_max, rho == 0.0);
      occ += b - a;
    } else if (rho == 0.0) {
      acc += disc * (p.h_phi_inv(b) - p.h_phi_inv(a));
    } else {
      acc += disc * segment_integral(weight, a, b, false);
    }
    if (rho > 0.0) {
      // the Gaussian factor alone makes the rest negligible
      if (-rho * b * b + b - r * occ < -kCutoffNats - 10.0) return {acc, false};
    } else if (r * occ - std::log1p(p.h_phi_inv(2 * b + 10)) >= kCutoffNats) {
      return {acc, false};
    }
  }
}

}  // namespace

MomentEstimate estimate_A_functional(const HittingSampler& s, double x0, double rho,
                                     const RateProfile& p, std::size_t n_paths,
                                     double s_horizon, double tail_tol) {
  if (!(rho >= 0.0)) throw std::invalid_argument("estimate_A_functional: rho must be >= 0");
  if (!(s_horizon > 0.0)) throw std::invalid_argument("estimate_A_functional: s_horizon > 0");
  validate_x0(*s.model, x0);
  if (rho > 0.0) {
    const double lt = log_gaussian_tail(p.phi(1.0), rho, s_horizon);
    if (lt > std::log(tail_tol))
      throw TailBoundError("estimate_A_functional: tail bound e^" + std::to_string(lt) +
                           " at s_horizon exceeds the tolerance");
  }
  const auto v = map_paths(n_paths, s.jobs, [&](std::size_t i) {
    return a_functional_path(s, x0, rho, p, s_horizon, i);
  });
  return finish(v, s.censor_threshold);
}

Calibration calibrate_r(const HittingSampler& s, const PsiFunction& psi, const RateProfile& p,
                        std::size_t n_paths, double se_multiplier) {
  const double kappa = psi.kappa();
  if (!(kappa >= 1.0)) throw std::invalid_argument("calibrate_r: kappa must be >= 1");
  Calibration cal;
  cal.r0 = 2.0 * kappa * std::log(4.0 * kappa);
  cal.report = CheckReport("step3_gate");
  const double factor = std::exp(-cal.r0 / (2.0 * kappa));
  double sup_mean = 0.0;
  std::vector<double> xs;
  if (const auto* ch = std::get_if<Ctmc>(s.model.get())) {
    for (auto i : s.target.members()) xs.push_back(static_cast<double>(i));
    (void)ch;
  } else {
    throw std::invalid_argument("calibrate_r: chains only (C must be a finite state set)");
  }
  double worst_censored = 0.0;
  for (double x0 : xs) {
    const auto v = map_paths(n_paths, s.jobs, [&](std::size_t i) {
      const auto tau = sample_tau1(*s.model, x0, s.target, kappa, s.path_stream(x0, i),
                                   s.horizon_cap);
      return tau ? Flagged{p.h_phi_inv(*tau), false} : Flagged{p.h_phi_inv(s.horizon_cap), true};
    });
    const auto e = finish(v, s.censor_threshold);
    cal.report.require_le("e^{-r0/(2kappa)}E[Hinv(tau1)]<=1/2", {x0, cal.r0}, factor * e.mean,
                          0.5, se_multiplier * factor * e.std_error);
    sup_mean = std::max(sup_mean, e.mean);
    worst_censored = std::max(worst_censored, e.censored_fraction);
  }
  // With the tau1 samples fixed the gate is monotone in r, so the downward
  // bisection has the closed form 2 kappa ln(2 sup E).
  cal.tightened = std::max(0.0, 2.0 * kappa * std::log(2.0 * sup_mean));
  cal.report.set_constant("r0", cal.r0);
  cal.report.set_constant("r_tightened", cal.tightened);
  cal.report.set_constant("kappa", kappa);
  cal.report.set_constant("sup_gate", factor * sup_mean);
  cal.report.set_constant("censored_fraction", worst_censored);
  if (worst_censored > s.censor_threshold) cal.report.mark_unreliable("tau1 censored above threshold");
  return cal;
}

std::optional<double> sample_tau_delta(const Model& m, const TargetSet& c, double x0,
                                       double delta, double cap, Stream path) {
  if (!(delta > 0.0)) throw std::invalid_argument("sample_tau_delta: delta must be > 0");
  PathWalker w(m, c, x0, path);
  for (;;) {
    const Segment s = w.next();
    if (s.begin >= cap) return std::nullopt;
    if (s.in_target && s.end > delta) {
      const double t = std::max(s.begin, delta);
      if (t > cap) return std::nullopt;
      return t;
    }
  }
}

CheckReport check_tau_delta_bound(const HittingSampler& s, double x0, const PsiFunction& psi,
                                  const RateProfile& p, double delta, std::size_t n_paths,
                                  double se_multiplier) {
  validate_x0(*s.model, x0);
  const auto v = map_paths(n_paths, s.jobs, [&](std::size_t i) {
    const auto tau = sample_tau_delta(*s.model, s.target, x0, delta, s.horizon_cap,
                                      s.path_stream(x0, i));
    // int_0^tau phi(H^{-1}(u)) du = H^{-1}(tau) - 1
    return tau ? Flagged{p.h_phi_inv(*tau) - 1.0, false}
               : Flagged{p.h_phi_inv(s.horizon_cap) - 1.0, true};
  });
  const auto e = finish(v, s.censor_threshold);
  const double bound = psi(0.0, x0) + psi.kappa() * delta * p.h_phi_inv(delta);
  CheckReport rep("tau_delta_bound");
  const double se = std::sqrt(e.std_error * e.std_error +
                              psi.std_error(0.0, x0) * psi.std_error(0.0, x0));
  rep.require_le("E[int_0^tau_C(delta) phi(Hinv)]<=psi(0,x)+kappa*delta*Hinv(delta)",
                 {x0, delta}, e.mean, bound, se_multiplier * se);
  rep.set_constant("mean", e.mean);
  rep.set_constant("std_error", e.std_error);
  rep.set_constant("bound", bound);
  rep.set_constant("censored_fraction", e.censored_fraction);
  if (e.unreliable) rep.mark_unreliable("tau_C(delta) censored above threshold");
  return rep;
}

}  // namespace subgeo
