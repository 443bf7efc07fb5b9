#include "subgeo/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "subgeo/errors.hpp"
#include "subgeo/parallel.hpp"

namespace subgeo {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_floor(double v, const char* what) {
  if (!std::isfinite(v) || v < 1.0)
    throw DomainError(std::string(what) + ": V must be finite and >= 1");
}

struct PendingRow {
  std::string predicate;
  std::vector<double> at;
  double lhs, rhs, slack;
};

void flush(CheckReport& rep, std::vector<std::vector<PendingRow>>& chunks) {
  for (auto& chunk : chunks)
    for (auto& r : chunk) rep.require_le(std::move(r.predicate), std::move(r.at), r.lhs, r.rhs, r.slack);
}

}  // namespace

// ----------------------------------------------------------- candidates

LyapunovCandidate LyapunovCandidate::on_states(std::vector<double> values) {
  if (values.empty()) throw DimensionError("LyapunovCandidate: no values");
  for (double v : values) require_floor(v, "LyapunovCandidate");
  LyapunovCandidate c;
  c.values_ = std::move(values);
  c.name_ = "table";
  return c;
}

LyapunovCandidate LyapunovCandidate::function(std::function<double(double)> v,
                                              std::string name) {
  LyapunovCandidate c;
  c.fn_ = std::move(v);
  c.name_ = std::move(name);
  return c;
}

double LyapunovCandidate::at(double x) const {
  if (fn_) {
    const double v = fn_(x);
    require_floor(v, "LyapunovCandidate");
    return v;
  }
  const auto i = static_cast<std::size_t>(x);
  if (x < 0 || i >= values_.size()) throw DimensionError("LyapunovCandidate: state out of range");
  return values_[i];
}

CheckReport check_geometric_drift(const Ctmc& m, const LyapunovCandidate& v, const TargetSet& c,
                                  double beta, double b, double tolerance) {
  if (!v.tabulated() || v.size() != m.size())
    throw DimensionError("check_geometric_drift: V must have one value per state");
  if (!(beta > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta and b must be > 0");
  CheckReport rep("geometric_drift");
  const auto lv = generator_apply(m, v.values());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double rhs = -beta * v[i] + (c.contains(i) ? b : 0.0);
    const double scale = std::abs(lv[i]) + beta * v[i] + b;
    rep.require_le("LV<=-beta*V+b*1_C", {static_cast<double>(i)}, lv[i], rhs,
                   tolerance * std::max(1.0, scale));
  }
  rep.set_constant("beta", beta);
  rep.set_constant("b", b);
  return rep;
}

// ---------------------------------------------------------------- drift

namespace {

DriftCertificate finish_certificate(std::vector<double> points, std::vector<double> lv,
                                    std::vector<double> phiv, TargetSet target, double K,
                                    double tolerance) {
  DriftCertificate cert;
  cert.report = CheckReport("subgeometric_drift");
  cert.points = std::move(points);
  cert.generator = std::move(lv);
  cert.residuals.resize(cert.points.size());
  cert.tolerance = tolerance;
  for (std::size_t i = 0; i < cert.points.size(); ++i) {
    const bool in_c = target.is_interval() ? target.contains(cert.points[i])
                                           : target.contains(static_cast<std::size_t>(cert.points[i]));
    const double k = in_c ? K : 0.0;
    cert.residuals[i] = cert.generator[i] + phiv[i] - k;
    cert.report.require_le("LV<=-phi(V)+K*1_C", {cert.points[i]}, cert.generator[i], k - phiv[i],
                           tolerance);
  }
  cert.K = K;
  cert.target = std::move(target);
  cert.passed = cert.report.passed();
  cert.report.set_constant("K", K);
  cert.report.note("C = " + cert.target.describe());
  return cert;
}

}  // namespace

DriftCertificate check_subgeometric_drift(const Ctmc& m, const LyapunovCandidate& v,
                                          const RateProfile& p, const DriftOptions& opts) {
  if (!v.tabulated() || v.size() != m.size())
    throw DimensionError("check_subgeometric_drift: V must have one value per state");
  const std::size_t n = m.size();
  const auto lv = generator_apply(m, v.values());
  std::vector<double> phiv(n), points(n), raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    phiv[i] = p.phi(v[i]);
    points[i] = static_cast<double>(i);
    raw[i] = lv[i] + phiv[i];
  }

  TargetSet target = TargetSet::mask({});
  if (opts.target) {
    target = *opts.target;
    if (target.is_interval()) throw std::invalid_argument("chain target must be a state set");
  } else {
    std::vector<char> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) mask[i] = raw[i] > 0.0;
    target = TargetSet::mask(std::move(mask));
    for (auto i : target.members()) {
      if (m.truncation > 0 && i >= m.truncation)
        throw AutoTargetError("automatic C reaches the truncation level N=" +
                              std::to_string(m.truncation) +
                              "; V is not a Lyapunov function at this truncation");
      if (opts.max_state && i > *opts.max_state)
        throw AutoTargetError("automatic C contains state " + std::to_string(i) +
                              ", outside the compact bound {0.." +
                              std::to_string(*opts.max_state) + "}");
    }
  }
  double K = 0.0;
  if (opts.K) {
    K = *opts.K;
  } else {
    for (auto i : target.members()) K = std::max(K, raw[i]);
  }
  return finish_certificate(std::move(points), lv, std::move(phiv), std::move(target), K,
                            opts.tolerance);
}

DriftCertificate check_subgeometric_drift(const Diffusion1d& m, const LyapunovCandidate& v,
                                          const RateProfile& p, const DriftOptions& opts) {
  if (opts.grid.size() < 3) throw std::invalid_argument("diffusion drift check needs a grid");
  std::vector<double> points, lv, phiv, raw;
  std::size_t excluded = 0;
  auto fv = [&v](double x) { return v.at(x); };
  for (double x : opts.grid) {
    if (x - opts.h < m.lo || x + opts.h > m.hi) {
      ++excluded;
      continue;
    }
    points.push_back(x);
    lv.push_back(generator_apply_diffusion(m, fv, x, opts.h));
    phiv.push_back(p.phi(v.at(x)));
    raw.push_back(lv.back() + phiv.back());
  }
  if (points.size() < 3) throw std::invalid_argument("too few grid points inside the domain");

  TargetSet target = TargetSet::interval(0.0, 0.0);
  if (opts.target) {
    target = *opts.target;
    if (!target.is_interval()) throw std::invalid_argument("diffusion target must be an interval");
  } else {
    double a = std::numeric_limits<double>::infinity(), b = -a;
    std::size_t first = points.size(), last = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (raw[i] > 0.0) {
        a = std::min(a, points[i]);
        b = std::max(b, points[i]);
        first = std::min(first, i);
        last = std::max(last, i);
      }
    if (first == points.size())
      throw AutoTargetError("automatic C is empty: no grid point violates the drift bound");
    if (first == 0 || last + 1 == points.size())
      throw AutoTargetError("automatic C reaches the edge of the evaluation grid");
    if (opts.max_interval && (a < opts.max_interval->first || b > opts.max_interval->second))
      throw AutoTargetError("automatic C leaves the compact bound");
    target = TargetSet::interval(a, b);
  }
  double K = 0.0;
  if (opts.K) {
    K = *opts.K;
  } else {
    for (std::size_t i = 0; i < points.size(); ++i)
      if (target.contains(points[i])) K = std::max(K, raw[i]);
  }
  auto cert = finish_certificate(std::move(points), std::move(lv), std::move(phiv),
                                 std::move(target), K, opts.tolerance);
  if (excluded) cert.report.note(std::to_string(excluded) + " grid point(s) within h of the boundary excluded");
  return cert;
}

FeasibleExponent largest_feasible_exponent(const Ctmc& m, const LyapunovCandidate& v,
                                           const DriftOptions& opts, double lo, double hi,
                                           double tol) {
  auto attempt = [&](double a) -> std::optional<DriftCertificate> {
    try {
      auto cert = check_subgeometric_drift(m, v, RateProfile(RateFunction::polynomial(a)), opts);
      if (cert.passed) return cert;
    } catch (const AutoTargetError&) {
    }
    return std::nullopt;
  };
  auto best = attempt(lo);
  if (!best)
    throw AutoTargetError("no feasible exponent: the drift certificate fails already at alpha=" +
                          std::to_string(lo));
  if (auto top = attempt(hi)) return {hi, *top};
  double good = lo;
  while (hi - good > tol) {
    const double mid = 0.5 * (good + hi);
    if (auto c = attempt(mid)) {
      good = mid;
      best = std::move(c);
    } else {
      hi = mid;
    }
  }
  return {good, *best};
}

// ------------------------------------------------------------------ psi

std::optional<std::size_t> MomentTable::position(std::size_t state) const {
  const auto it = std::find(states.begin(), states.end(), state);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

PsiFunction PsiFunction::from_v(const LyapunovCandidate& v, const RateProfile& p) {
  PsiFunction f(Source::FromV, p);
  f.v_ = v;
  return f;
}

PsiFunction PsiFunction::from_table(MomentTable table, HittingForm form, const RateProfile& p) {
  if (table.times.empty() || table.states.empty())
    throw std::invalid_argument("from_table: empty moment table");
  if (table.cells.size() != table.times.size() * table.states.size() ||
      table.in_target.size() != table.states.size())
    throw DimensionError("from_table: cell count does not match the grid");
  if (table.times.front() != 0.0) throw std::invalid_argument("from_table: grid must start at t=0");
  double u_sup = -std::numeric_limits<double>::infinity();
  for (std::size_t pos = 0; pos < table.states.size(); ++pos) {
    if (!table.in_target[pos]) continue;
    const auto& c = table.cell(0, pos);
    u_sup = std::max(u_sup, c.h + table.se_multiplier * std::sqrt(c.var_h / static_cast<double>(c.n)));
  }
  if (!std::isfinite(u_sup)) throw std::invalid_argument("from_table: no tabulated state lies in C");
  PsiFunction f(Source::FromHitting, p);
  f.form_ = form;
  const double r = table.r;
  f.table_ = std::move(table);
  if (form == HittingForm::Literal)
    f.set_constants(u_sup, r * u_sup, p.phi(1.0));
  else
    f.set_constants(2.0 * u_sup - 1.0, 2.0 * r * u_sup, p.phi(1.0));
  return f;
}

PsiFunction PsiFunction::custom(std::function<double(double, double)> fn, const RateProfile& p,
                                double kappa_sup, double kappa_drift, double eta) {
  PsiFunction f(Source::Custom, p);
  f.fn_ = std::move(fn);
  f.set_constants(kappa_sup, kappa_drift, eta);
  return f;
}

std::optional<std::size_t> PsiFunction::time_index(double t) const {
  const auto& ts = table_->times;
  const auto it = std::lower_bound(ts.begin(), ts.end(), t - 1e-12 * std::max(1.0, t));
  if (it == ts.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, t)) return std::nullopt;
  return static_cast<std::size_t>(it - ts.begin());
}

bool PsiFunction::covers(std::size_t x) const {
  if (source_ == Source::FromHitting) return table_->position(x).has_value();
  if (source_ == Source::FromV && v_->tabulated()) return x < v_->size();
  return true;
}

double PsiFunction::operator()(double t, double x) const {
  switch (source_) {
    case Source::FromV: {
      const double hv = profile_.h_phi(v_->at(x));
      return 2.0 * profile_.h_phi_inv(hv + t) - profile_.h_phi_inv(t);
    }
    case Source::Custom:
      return fn_(t, x);
    case Source::FromHitting: {
      const auto k = time_index(t);
      const auto pos = table_->position(static_cast<std::size_t>(x));
      if (!k || !pos) throw DomainError("psi: (t, x) is not a tabulated cell");
      const double u = table_->cell(*k, *pos).h;
      return form_ == HittingForm::Literal ? u : 2.0 * u - profile_.h_phi_inv(t);
    }
  }
  return 0.0;
}

std::optional<double> PsiFunction::time_derivative(double t, double x) const {
  if (source_ == Source::FromV) {
    if (profile_.method() != InverseMethod::ClosedForm) return std::nullopt;
    const double hv = profile_.h_phi(v_->at(x));
    return 2.0 * profile_.rate(hv + t) - profile_.rate(t);
  }
  if (source_ == Source::FromHitting) {
    const auto k = time_index(t);
    const auto pos = table_->position(static_cast<std::size_t>(x));
    if (!k || !pos) throw DomainError("psi: (t, x) is not a tabulated cell");
    const double d = table_->cell(*k, *pos).d;
    return form_ == HittingForm::Literal ? d : 2.0 * d - profile_.rate(t);
  }
  return std::nullopt;
}

double PsiFunction::std_error(double t, double x) const {
  if (source_ != Source::FromHitting) return 0.0;
  const auto k = time_index(t);
  const auto pos = table_->position(static_cast<std::size_t>(x));
  if (!k || !pos) throw DomainError("psi: (t, x) is not a tabulated cell");
  const auto& c = table_->cell(*k, *pos);
  const double se = std::sqrt(c.var_h / static_cast<double>(c.n));
  return form_ == HittingForm::Literal ? se : 2.0 * se;
}

PsiFunction build_psi_from_v(const LyapunovCandidate& v, const RateProfile& p,
                             const DriftCertificate& cert) {
  if (!cert.passed) throw std::invalid_argument("build_psi_from_v: certificate did not pass");
  auto psi = PsiFunction::from_v(v, p);
  double sup_c = 0.0;
  for (double x : cert.points) {
    const bool in_c = cert.target.is_interval() ? cert.target.contains(x)
                                                : cert.target.contains(static_cast<std::size_t>(x));
    if (in_c) sup_c = std::max(sup_c, psi(0.0, x));
  }
  psi.set_constants(sup_c, 2.0 * cert.K, 2.0 * p.phi(1.0));
  return psi;
}

// ------------------------------------------------------------ condition 2

namespace {

/// d/dt of g at t by second-order differences, with a Richardson error
/// estimate from the step-2dt difference.
std::pair<double, double> time_difference(const std::function<double(double)>& g, double t,
                                          double dt) {
  auto diff = [&](double h) {
    if (t >= h) return (g(t + h) - g(t - h)) / (2 * h);
    return (-3 * g(t) + 4 * g(t + h) - g(t + 2 * h)) / (2 * h);
  };
  const double d1 = diff(dt), d2 = diff(2 * dt);
  return {d1, std::abs(d1 - d2) / 3.0};
}

}  // namespace

CheckReport check_condition2(const Ctmc& m, const PsiFunction& psi, const RateProfile& p,
                             const TargetSet& c, std::span<const double> t_grid, double dt,
                             const Condition2Options& opts) {
  if (t_grid.empty()) throw std::invalid_argument("check_condition2: empty t-grid");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1]))
      throw std::invalid_argument("check_condition2: t-grid must be increasing");
  if (!(dt > 0.0)) throw std::invalid_argument("check_condition2: dt must be > 0");
  const std::size_t n = m.size();
  const double kappa = psi.kappa();
  const bool tab = psi.source() == PsiFunction::Source::FromHitting;
  const double form_scale = tab && psi.form() == HittingForm::Corrected ? 2.0 : 1.0;

  // Checked states: every neighbour must be evaluable.
  std::vector<std::size_t> states;
  std::size_t skipped = 0;
  for (std::size_t x = 0; x < n; ++x) {
    bool ok = psi.covers(x);
    for (const auto& e : m.transitions(x)) ok = ok && psi.covers(e.to);
    if (ok)
      states.push_back(x);
    else if (psi.covers(x))
      ++skipped;
  }

  CheckReport rep("condition2");
  auto cell_var = [&](std::size_t k, std::size_t x) -> const MomentCell& {
    const auto& t = *psi.table();
    return t.cell(k, *t.position(x));
  };
  std::vector<std::size_t> table_k(t_grid.size(), 0);
  if (tab) {
    const auto& ts = psi.table()->times;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      const auto it = std::find_if(ts.begin(), ts.end(), [&](double s) {
        return std::abs(s - t_grid[k]) <= 1e-12 * std::max(1.0, s);
      });
      if (it == ts.end()) throw std::invalid_argument("check_condition2: t not in the psi table");
      table_k[k] = static_cast<std::size_t>(it - ts.begin());
    }
  }

  auto chunks = map_paths(t_grid.size(), opts.jobs, [&](std::size_t k) {
    std::vector<PendingRow> rows;
    const double t = t_grid[k];
    const double hinv = p.h_phi_inv(t);
    const double rate = p.phi(hinv);
    std::vector<double> now(n, 0.0);
    for (std::size_t x = 0; x < n; ++x)
      if (psi.covers(x)) now[x] = psi(t, static_cast<double>(x));
    for (std::size_t x : states) {
      const double xd = static_cast<double>(x);
      double dpsi = 0.0, fd_err = 0.0;
      if (auto d = psi.time_derivative(t, xd)) {
        dpsi = *d;
      } else {
        std::tie(dpsi, fd_err) =
            time_difference([&](double s) { return psi(s, xd); }, t, dt);
      }
      double lpsi = 0.0, mag = std::abs(now[x]) * m.exit_rate(x);
      for (const auto& e : m.transitions(x)) {
        lpsi += e.rate * (now[e.to] - now[x]);
        mag += e.rate * std::abs(now[e.to]);
      }
      double se = 0.0;
      if (tab) {
        const auto& cx = cell_var(table_k[k], x);
        const double ex = m.exit_rate(x);
        double var = (cx.var_d + ex * ex * cx.var_h - 2 * ex * cx.cov_hd) / static_cast<double>(cx.n);
        for (const auto& e : m.transitions(x)) {
          const auto& cy = cell_var(table_k[k], e.to);
          var += e.rate * e.rate * cy.var_h / static_cast<double>(cy.n);
        }
        se = form_scale * std::sqrt(std::max(0.0, var));
      }
      const bool in_c = c.contains(x);
      const double lhs = dpsi + lpsi;
      const double rhs = (in_c ? kappa * hinv : 0.0) - rate;
      const double slack = opts.abs_tol + opts.rel_tol * (std::abs(dpsi) + mag + std::abs(rhs)) +
                           64 * kEps * mag + 2 * fd_err + opts.se_multiplier * se;
      rows.push_back({"(d_t+L)psi<=kappa*Hinv*1_C-phi(Hinv)", {t, xd}, lhs, rhs, slack});
    }
    for (std::size_t x = 0; x < n; ++x) {
      if (!psi.covers(x)) continue;
      const double xd = static_cast<double>(x);
      rows.push_back({"psi>=Hinv", {t, xd}, hinv, now[x], opts.abs_tol + opts.rel_tol * hinv});
      if (k + 1 < t_grid.size()) {
        const double next = psi(t_grid[k + 1], xd);
        rows.push_back({"psi_nondecreasing_in_t", {t, xd}, now[x], next,
                        opts.abs_tol + opts.rel_tol * std::abs(next)});
      }
    }
    return rows;
  });
  flush(rep, chunks);

  // Clauses at t = 0.
  std::vector<double> zero(n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    if (psi.covers(x)) zero[x] = psi(0.0, static_cast<double>(x));
  for (std::size_t x = 0; x < n; ++x) {
    if (!psi.covers(x) || !c.contains(x)) continue;
    rep.require_le("psi(0,x)<=kappa_on_C", {static_cast<double>(x)}, zero[x], kappa,
                   opts.abs_tol + opts.rel_tol * kappa);
  }
  for (std::size_t x : states) {
    double lpsi = 0.0, var = 0.0, mag = std::abs(zero[x]) * m.exit_rate(x);
    for (const auto& e : m.transitions(x)) {
      lpsi += e.rate * (zero[e.to] - zero[x]);
      mag += e.rate * std::abs(zero[e.to]);
    }
    if (tab) {
      const auto& cx = cell_var(0, x);
      const double ex = m.exit_rate(x);
      var = ex * ex * cx.var_h / static_cast<double>(cx.n);
      for (const auto& e : m.transitions(x)) {
        const auto& cy = cell_var(0, e.to);
        var += e.rate * e.rate * cy.var_h / static_cast<double>(cy.n);
      }
    }
    const double rhs = (c.contains(x) ? kappa : 0.0) - psi.eta();
    rep.require_le("Lpsi(0,x)<=kappa*1_C-eta", {static_cast<double>(x)}, lpsi, rhs,
                   opts.abs_tol + opts.rel_tol * (mag + std::abs(rhs)) + 64 * kEps * mag +
                       opts.se_multiplier * form_scale * std::sqrt(var));
  }
  if (tab && !psi.table()->times.empty() && psi.table()->times.front() != 0.0)
    rep.fail("psi table has no t = 0 column");

  rep.set_constant("kappa", kappa);
  rep.set_constant("kappa_sup", psi.kappa_sup());
  rep.set_constant("kappa_drift", psi.kappa_drift());
  rep.set_constant("eta", psi.eta());
  rep.set_constant("worst_residual",
                   rep.worst_residual("(d_t+L)psi<=kappa*Hinv*1_C-phi(Hinv)"));
  if (skipped)
    rep.note(std::to_string(skipped) +
             " tabulated state(s) skipped because a neighbour is not tabulated");
  return rep;
}

CheckReport check_condition2(const Diffusion1d& m, const PsiFunction& psi, const RateProfile& p,
                             const TargetSet& c, std::span<const double> t_grid,
                             std::span<const double> x_grid, double h, double dt,
                             const Condition2Options& opts) {
  if (psi.source() == PsiFunction::Source::FromHitting)
    throw std::invalid_argument("check_condition2: tabulated psi is chain-only");
  if (!c.is_interval()) throw std::invalid_argument("diffusion target must be an interval");
  std::vector<double> xs;
  std::size_t excluded = 0;
  for (double x : x_grid) {
    if (x - 2 * h < m.lo || x + 2 * h > m.hi)
      ++excluded;
    else
      xs.push_back(x);
  }
  const double kappa = psi.kappa();
  CheckReport rep("condition2");
  auto generator = [&](double t, double x, double step) {
    return generator_apply_diffusion(m, [&](double y) { return psi(t, y); }, x, step);
  };
  auto chunks = map_paths(t_grid.size(), opts.jobs, [&](std::size_t k) {
    std::vector<PendingRow> rows;
    const double t = t_grid[k];
    const double hinv = p.h_phi_inv(t);
    const double rate = p.phi(hinv);
    for (double x : xs) {
      double dpsi = 0.0, fd_err = 0.0;
      if (auto d = psi.time_derivative(t, x))
        dpsi = *d;
      else
        std::tie(dpsi, fd_err) = time_difference([&](double s) { return psi(s, x); }, t, dt);
      const double l1 = generator(t, x, h), l2 = generator(t, x, 2 * h);
      const double val = std::abs(psi(t, x));
      const double s = m.sigma(x);
      const double round = 64 * kEps * val * (s * s / (h * h) + std::abs(m.drift(x)) / h);
      const double lhs = dpsi + l1;
      const double rhs = (c.contains(x) ? kappa * hinv : 0.0) - rate;
      const double slack = opts.abs_tol + opts.rel_tol * (std::abs(lhs) + std::abs(rhs)) +
                           2 * fd_err + std::abs(l1 - l2) / 3.0 * 2 + round;
      rows.push_back({"(d_t+L)psi<=kappa*Hinv*1_C-phi(Hinv)", {t, x}, lhs, rhs, slack});
      rows.push_back({"psi>=Hinv", {t, x}, hinv, psi(t, x), opts.abs_tol + opts.rel_tol * hinv});
    }
    return rows;
  });
  flush(rep, chunks);
  for (double x : xs) {
    const double z = psi(0.0, x);
    if (c.contains(x))
      rep.require_le("psi(0,x)<=kappa_on_C", {x}, z, kappa, opts.abs_tol + opts.rel_tol * kappa);
    const double l1 = generator(0.0, x, h), l2 = generator(0.0, x, 2 * h);
    const double s = m.sigma(x);
    const double round = 64 * kEps * std::abs(z) * (s * s / (h * h) + std::abs(m.drift(x)) / h);
    const double rhs = (c.contains(x) ? kappa : 0.0) - psi.eta();
    rep.require_le("Lpsi(0,x)<=kappa*1_C-eta", {x}, l1, rhs,
                   opts.abs_tol + opts.rel_tol * std::abs(rhs) + 2 * std::abs(l1 - l2) / 3.0 + round);
  }
  rep.set_constant("kappa", kappa);
  rep.set_constant("kappa_sup", psi.kappa_sup());
  rep.set_constant("kappa_drift", psi.kappa_drift());
  rep.set_constant("eta", psi.eta());
  rep.set_constant("worst_residual",
                   rep.worst_residual("(d_t+L)psi<=kappa*Hinv*1_C-phi(Hinv)"));
  if (excluded) rep.note(std::to_string(excluded) + " grid point(s) near the boundary excluded");
  return rep;
}

}  // namespace subgeo
