#include "subgeo/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>

#include "subgeo/convergence.hpp"
#include "subgeo/drift.hpp"
#include "subgeo/errors.hpp"
#include "subgeo/hitting.hpp"
#include "subgeo/numerics.hpp"
#include "subgeo/registry.hpp"
#include "subgeo/rng.hpp"

namespace subgeo {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json row_json(const CheckRow& r) {
  json at = json::array();
  for (double a : r.at) at.push_back(jnum(a));
  return {{"predicate", r.predicate}, {"at", at},         {"lhs", jnum(r.lhs)},
          {"rhs", jnum(r.rhs)},       {"slack", jnum(r.slack)}, {"ok", r.ok}};
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string rows_csv(const std::vector<CheckReport>& reports) {
  std::string out = "report,predicate,at,lhs,rhs,slack,ok\n";
  for (const auto& r : reports)
    for (const auto& row : r.rows()) {
      std::string at;
      for (std::size_t i = 0; i < row.at.size(); ++i) at += (i ? ";" : "") + num(row.at[i]);
      out += r.name() + "," + row.predicate + "," + at + "," + num(row.lhs) + "," +
             num(row.rhs) + "," + num(row.slack) + "," + (row.ok ? "1" : "0") + "\n";
    }
  return out;
}

struct HittingRow {
  std::string operation;
  double x0, r;
  std::size_t n;
  double mean, se, censored, bound;
  bool pass;
};

std::string hitting_csv(const std::string& id, const std::vector<HittingRow>& rows) {
  std::string out = "scenario,operation,x0,r,n_paths,mean,std_error,censored_fraction,bound,pass\n";
  for (const auto& h : rows)
    out += id + "," + h.operation + "," + num(h.x0) + "," + num(h.r) + "," + std::to_string(h.n) +
           "," + num(h.mean) + "," + num(h.se) + "," + num(h.censored) + "," + num(h.bound) +
           "," + (h.pass ? "1" : "0") + "\n";
  return out;
}

LyapunovCandidate make_v(const Scenario& s, std::size_t n) {
  if (!s.v_power && s.v_values.empty())
    throw ConfigError("scenario '" + s.id + "' has no 'lyapunov' block");
  if (s.v_power) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(static_cast<double>(i + 1), *s.v_power);
    return LyapunovCandidate::on_states(std::move(v));
  }
  if (s.v_values.size() != n)
    throw ConfigError("lyapunov.values has " + std::to_string(s.v_values.size()) +
                      " entries, the chain has " + std::to_string(n) + " states");
  return LyapunovCandidate::on_states(s.v_values);
}

DriftOptions drift_options(const Scenario& s, std::size_t n) {
  DriftOptions o;
  o.tolerance = s.drift_tolerance;
  o.max_state = s.max_state;
  if (s.target) {
    for (auto i : *s.target)
      if (i >= n) throw ConfigError("target state " + std::to_string(i) + " is out of range");
    o.target = TargetSet::states(n, *s.target);
  }
  return o;
}

/// Everything later stages consume.
struct Context {
  Context(Scenario sc, Ctmc m) : s(std::move(sc)), chain(std::move(m)), v(LyapunovCandidate::on_states({1.0})) {}

  Scenario s;
  Ctmc chain;
  LyapunovCandidate v;
  std::optional<RateProfile> profile;
  std::optional<DriftCertificate> cert;
  double alpha = kNaN;
  std::optional<PsiFunction> psi_v;
  std::optional<HittingSampler> sampler;
  double r0 = kNaN, r = kNaN;
  std::optional<CheckReport> step3;
  std::vector<std::size_t> window;
  std::vector<HittingRow> hitting_rows;
};

class Runner {
 public:
  Runner(const PipelineOptions& o, PipelineResult& res) : o_(o), res_(res) {}

  /// Runs one stage unless an earlier one failed; ConfigError escapes.
  void stage(const std::string& name, const std::function<void(StageOutcome&)>& body) {
    StageOutcome st;
    st.name = name;
    if (failed_) {
      st.message = "skipped after an earlier failure";
      res_.stages.push_back(std::move(st));
      return;
    }
    try {
      body(st);
      bool ok = true;
      for (const auto& r : st.reports) ok = ok && r.passed();
      st.status = ok ? "pass" : "fail";
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      st.status = "error";
      st.message = e.what();
    }
    if (st.status != "pass") failed_ = true;
    if (!o_.quiet)
      std::cerr << "[" << name << "] " << st.status << (st.message.empty() ? "" : ": ")
                << st.message << "\n";
    res_.stages.push_back(std::move(st));
  }

  bool failed() const { return failed_; }

 private:
  const PipelineOptions& o_;
  PipelineResult& res_;
  bool failed_ = false;
};

Scenario with_overrides(Scenario s, const PipelineOptions& o) {
  if (o.seed) s.seed = *o.seed;
  if (o.paths) {
    if (*o.paths < 100) throw ConfigError("--paths must be >= 100");
    s.n_paths = *o.paths;
  }
  if (o.jobs) {
    if (*o.jobs < 1) throw ConfigError("--jobs must be >= 1");
    s.jobs = *o.jobs;
  }
  return s;
}

void prepare_out_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const char* f : {"summary.json", "rate_checks.csv", "drift_certificate.csv",
                        "hitting_estimates.csv", "tv_curve.csv", "tv_curve_shift.csv"})
    std::filesystem::remove(dir / f);
}

json stages_json(const std::vector<StageOutcome>& stages) {
  json out = json::array();
  for (const auto& st : stages) {
    json reps = json::array(), expected = json::array();
    for (const auto& r : st.reports) reps.push_back(report_json(r));
    for (const auto& r : st.expected_failures) expected.push_back(report_json(r));
    json j = {{"name", st.name}, {"status", st.status}, {"reports", reps}};
    if (!st.message.empty()) j["message"] = st.message;
    if (!expected.empty()) j["expected_failures"] = expected;
    out.push_back(j);
  }
  return out;
}

int exit_code(const std::vector<StageOutcome>& stages) {
  for (const auto& st : stages)
    if (st.status != "pass") return 1;
  return 0;
}

/// Certified alpha by bisection when the scenario asks for it.
double resolve_alpha(const Scenario& s, const Ctmc& chain, const LyapunovCandidate& v) {
  if (s.rate.alpha) return *s.rate.alpha;
  return largest_feasible_exponent(chain, v, drift_options(s, chain.size())).alpha;
}

}  // namespace

const StageOutcome* PipelineResult::stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

json report_json(const CheckReport& r) {
  json j = {{"name", r.name()},
            {"passed", r.passed()},
            {"unreliable", r.unreliable()},
            {"rows", r.rows().size()},
            {"violations", r.violation_count()}};
  if (const auto w = r.worst()) j["tightest"] = row_json(*w);
  if (const auto f = r.first_violation()) j["first_violation"] = row_json(*f);
  json c = json::object();
  for (const auto& [k, v] : r.constants()) c[k] = jnum(v);
  j["constants"] = c;
  if (!r.notes().empty()) j["notes"] = r.notes();
  return j;
}

std::vector<CheckReport> rate_checks(const RateProfile& p, std::uint64_t seed) {
  std::vector<CheckReport> out;
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(std::ldexp(1.0, k));
  out.push_back(validate_assumptions(p, grid));

  Stream pairs_rng(seed, stream_tag("rate-pairs"));
  std::vector<std::pair<double, double>> pairs(10000), samples(10000);
  for (auto& pr : pairs) pr = {50.0 * pairs_rng.uniform(), 50.0 * pairs_rng.uniform()};
  out.push_back(check_submultiplicative(p, pairs));
  Stream scale_rng(seed, stream_tag("rate-scaling"));
  for (auto& sm : samples)
    sm = {std::pow(10.0, 4.0 * scale_rng.uniform()), 1.0 + 99.0 * scale_rng.uniform()};
  out.push_back(check_scaling(p, samples));

  out.push_back(check_round_trip(p, numerics::logspace(1.0, 1e6, 61), 1e-7));
  out.push_back(check_derivative_identity(p, numerics::linspace(0.0, 100.0, 51)));
  return out;
}

PipelineResult run_validate_rate(const Scenario& scenario, const PipelineOptions& o) {
  const Scenario s = with_overrides(scenario, o);
  double alpha = s.rate.alpha.value_or(kNaN);
  if (!s.rate.alpha && s.rate.kind == "polynomial") {
    const auto chain = scenario_chain(s);
    alpha = resolve_alpha(s, chain, make_v(s, chain.size()));
  }
  const auto p = s.rate.kind == "polynomial" ? make_profile(s.rate, alpha) : make_profile(s.rate);
  prepare_out_dir(o.out_dir);

  PipelineResult res;
  Runner run(o, res);
  std::vector<CheckReport> reports;
  run.stage("rate", [&](StageOutcome& st) {
    st.reports = rate_checks(p, s.seed);
    reports = st.reports;
  });
  write_file(o.out_dir / "rate_checks.csv", rows_csv(reports));
  res.exit_code = exit_code(res.stages);
  res.summary = {{"command", "validate-rate"},
                 {"scenario", s.id},
                 {"rate", p.describe()},
                 {"alpha", jnum(alpha)},
                 {"seed", s.seed},
                 {"stages", stages_json(res.stages)},
                 {"exit_code", res.exit_code}};
  write_file(o.out_dir / "summary.json", res.summary.dump(2) + "\n");
  return res;
}

PipelineResult run_pipeline(const Scenario& scenario, const PipelineOptions& o) {
  // Everything that can be a configuration problem is resolved up front.
  Context c(with_overrides(scenario, o), scenario_chain(scenario));
  const Scenario& s = c.s;
  c.v = make_v(s, c.chain.size());
  const DriftOptions dopts = drift_options(s, c.chain.size());
  if (s.rate.alpha || s.rate.kind != "polynomial") c.profile = make_profile(s.rate);
  if (s.convergence.enabled) {
    if (s.convergence.x0 >= c.chain.size()) throw ConfigError("convergence.x0 is out of range");
    if (!s.convergence.shift_model.empty()) (void)scenario_chain(s.convergence.shift_model, s.base_dir);
  }
  prepare_out_dir(o.out_dir);

  PipelineResult res;
  Runner run(o, res);

  run.stage("drift", [&](StageOutcome& st) {
    if (!c.profile) {
      auto best = largest_feasible_exponent(c.chain, c.v, dopts);
      c.alpha = best.alpha;
      c.profile = make_profile(s.rate, best.alpha);
      c.cert = std::move(best.certificate);
    } else {
      c.alpha = s.rate.alpha.value_or(kNaN);
      c.cert = check_subgeometric_drift(c.chain, c.v, *c.profile, dopts);
    }
    auto rep = c.cert->report;
    rep.set_constant("alpha", c.alpha);
    rep.set_constant("K", c.cert->K);
    rep.set_constant("target_size", static_cast<double>(c.cert->target.size()));
    st.reports.push_back(rep);
    std::string csv = "state,V,LV,phi_V,in_C,residual\n";
    for (std::size_t i = 0; i < c.chain.size(); ++i)
      csv += std::to_string(i) + "," + num(c.v[i]) + "," + num(c.cert->generator[i]) + "," +
             num(c.profile->phi(c.v[i])) + "," + (c.cert->target.contains(i) ? "1" : "0") + "," +
             num(c.cert->residuals[i]) + "\n";
    write_file(o.out_dir / "drift_certificate.csv", csv);
  });

  run.stage("rate", [&](StageOutcome& st) {
    st.reports = rate_checks(*c.profile, s.seed);
    write_file(o.out_dir / "rate_checks.csv", rows_csv(st.reports));
  });

  run.stage("condition2_from_v", [&](StageOutcome& st) {
    c.psi_v = build_psi_from_v(c.v, *c.profile, *c.cert);
    Condition2Options co;
    co.jobs = s.jobs;
    const auto grid = numerics::linspace(0.0, s.c2_t_max, s.c2_t_points);
    auto rep = check_condition2(c.chain, *c.psi_v, *c.profile, c.cert->target, grid, s.c2_dt, co);
    st.reports.push_back(std::move(rep));
  });

  run.stage("condition1", [&](StageOutcome& st) {
    HittingSampler sm(c.chain, c.cert->target, 1.0, s.seed);
    sm.horizon_cap = s.horizon_cap;
    sm.jobs = s.jobs;
    sm.censor_threshold = s.censor_threshold;
    auto cal = calibrate_r(sm, *c.psi_v, *c.profile, s.n_paths);
    c.r0 = cal.r0;
    c.r = s.r.value_or(cal.r0);
    c.step3 = cal.report;
    c.sampler = sm.with_r(c.r);
    CheckReport rep("hitting_moments");
    rep.set_constant("r", c.r);
    rep.set_constant("r0", c.r0);
    rep.set_constant("r_tightened", cal.tightened);
    double sup = 0.0;
    for (auto x : c.cert->target.members()) {
      const double xd = static_cast<double>(x);
      const auto e = estimate_hitting_moment(*c.sampler, xd, *c.profile, s.n_paths);
      rep.require_le("censored_fraction<=threshold", {xd}, e.censored_fraction,
                     s.censor_threshold);
      rep.require_lt("moment_finite", {xd}, e.mean, std::numeric_limits<double>::infinity());
      sup = std::max(sup, e.mean);
      c.hitting_rows.push_back({"hitting_moment", xd, c.r, e.n_paths, e.mean, e.std_error,
                                e.censored_fraction, kNaN, !e.unreliable});
    }
    rep.set_constant("sup_moment_on_C", sup);
    st.reports.push_back(std::move(rep));
  });

  run.stage("condition2_from_hitting", [&](StageOutcome& st) {
    const auto members = c.cert->target.members();
    const std::size_t top = std::min(c.chain.size() - 1, members.back() + s.psi_extra_states);
    for (std::size_t i = 0; i <= top; ++i) c.window.push_back(i);
    const auto ts = numerics::linspace(0.0, s.psi_t_max, s.psi_t_points);
    HittingSampler sm = *c.sampler;
    const auto corrected = psi_via_hitting(sm, *c.profile, ts, c.window, s.psi_paths);
    const auto literal = PsiFunction::from_table(*corrected.table(), HittingForm::Literal,
                                                 *c.profile);
    Condition2Options co;
    co.jobs = s.jobs;
    const double dt = ts[1] - ts[0];
    auto rc = check_condition2(c.chain, corrected, *c.profile, c.cert->target, ts, dt, co);
    rc.set_constant("kappa_sup", corrected.kappa_sup());
    rc.set_constant("kappa_drift", corrected.kappa_drift());
    rc.set_constant("eta", corrected.eta());
    st.reports.push_back(std::move(rc));
    auto rl = check_condition2(c.chain, literal, *c.profile, c.cert->target, ts, dt, co);
    rl.note("literal form E[Hinv(tau~+t)]: off C (d_t+L)u = 0, so the generator clause is "
            "expected to fail there");
    st.expected_failures.push_back(std::move(rl));
    for (std::size_t pos = 0; pos < c.window.size(); ++pos) {
      const auto& cell = corrected.table()->cell(0, pos);
      c.hitting_rows.push_back({"psi_hitting_u0", static_cast<double>(c.window[pos]), c.r,
                                cell.n, cell.h, std::sqrt(cell.var_h / static_cast<double>(cell.n)),
                                cell.censored_fraction, kNaN, true});
    }
  });

  run.stage("step_bounds", [&](StageOutcome& st) {
    const double kappa = c.psi_v->kappa();
    std::vector<double> xs(c.window.begin(), c.window.end());
    auto s1 = check_step1_bound(*c.sampler, *c.psi_v, *c.profile, xs, s.n_paths);
    const auto& means = s1.series().at("mean");
    const auto& ses = s1.series().at("std_error");
    const auto& bounds = s1.series().at("bound");
    for (std::size_t i = 0; i < xs.size(); ++i)
      c.hitting_rows.push_back({"step1_tau1", xs[i], kNaN, s.n_paths, means[i], ses[i], kNaN,
                                bounds[i], s1.rows()[i].ok});
    st.reports.push_back(std::move(s1));
    st.reports.push_back(*c.step3);

    CheckReport s4("step4_A_functional");
    const auto a_sampler = c.sampler->with_r(c.r0);
    for (auto x : c.cert->target.members()) {
      const double xd = static_cast<double>(x);
      const auto a = estimate_A_functional(a_sampler, xd, 0.0, *c.profile, s.n_paths,
                                           s.horizon_cap);
      const bool ok = s4.require_le("A_{x,0,r0}<=4kappa", {xd, c.r0}, a.mean, 4.0 * kappa,
                                    3.0 * a.std_error);
      if (a.unreliable) s4.mark_unreliable("A functional censored at x=" + num(xd));
      c.hitting_rows.push_back({"step4_A", xd, c.r0, a.n_paths, a.mean, a.std_error,
                                a.censored_fraction, 4.0 * kappa, ok});
    }
    s4.set_constant("kappa", kappa);
    st.reports.push_back(std::move(s4));

    for (double xd : xs) {
      auto td = check_tau_delta_bound(*c.sampler, xd, *c.psi_v, *c.profile, s.delta, s.n_paths);
      c.hitting_rows.push_back({"tau_delta", xd, kNaN, s.n_paths, td.constant("mean").value(),
                                td.constant("std_error").value(),
                                td.constant("censored_fraction").value(),
                                td.constant("bound").value(), td.passed()});
      st.reports.push_back(std::move(td));
    }
  });
  if (!c.hitting_rows.empty())
    write_file(o.out_dir / "hitting_estimates.csv", hitting_csv(s.id, c.hitting_rows));

  if (s.convergence.enabled) {
    run.stage("convergence", [&](StageOutcome& st) {
      const auto& cv = s.convergence;
      TvOptions to;
      to.jobs = s.jobs;
      const auto curve = tv_curve(c.chain, cv.x0, *c.profile, cv.times, to);
      write_file(o.out_dir / "tv_curve.csv", curve.to_csv());
      auto van = check_vanishing(curve, cv.burn_in, cv.window);
      van.set_constant("tv_error", curve.tv_error);
      st.reports.push_back(std::move(van));
      if (s.rate.kind == "polynomial") {
        const auto range = cv.fit_range.value_or(
            std::pair{std::max(cv.times.front(), cv.burn_in), cv.times.back()});
        const auto fit = fit_polynomial_rate(curve, range.first, range.second);
        st.reports.push_back(check_polynomial_rate(fit, c.alpha, cv.margin));
      }
      if (!cv.shift_model.empty()) {
        const auto other = scenario_chain(cv.shift_model, s.base_dir);
        if (cv.x0 >= other.size()) throw ConfigError("convergence.x0 is out of range for shift_model");
        const auto curve2 = tv_curve(other, cv.x0, *c.profile, cv.times, to);
        write_file(o.out_dir / "tv_curve_shift.csv", curve2.to_csv());
        st.reports.push_back(check_truncation_shift(curve, curve2, cv.shift_tolerance));
      }
    });
  }

  res.exit_code = exit_code(res.stages);
  json target = json::array();
  if (c.cert)
    for (auto i : c.cert->target.members()) target.push_back(i);
  res.summary = {{"command", "pipeline"},
                 {"scenario", s.id},
                 {"model", c.chain.name()},
                 {"rate", c.profile ? c.profile->describe() : std::string("uncertified")},
                 {"alpha", jnum(c.alpha)},
                 {"seed", s.seed},
                 {"n_paths", s.n_paths},
                 {"target", target},
                 {"K", jnum(c.cert ? c.cert->K : kNaN)},
                 {"kappa", jnum(c.psi_v ? c.psi_v->kappa() : kNaN)},
                 {"r0", jnum(c.r0)},
                 {"r", jnum(c.r)},
                 {"stages", stages_json(res.stages)},
                 {"exit_code", res.exit_code}};
  write_file(o.out_dir / "summary.json", res.summary.dump(2) + "\n");
  return res;
}

}  // namespace subgeo
