// Acceptance run: one PASS/FAIL line per criterion, each timed against its
// single-core budget. Exit code 0 only if every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subgeo/convergence.hpp"
#include "subgeo/drift.hpp"
#include "subgeo/hitting.hpp"
#include "subgeo/numerics.hpp"
#include "subgeo/pipeline.hpp"
#include "subgeo/registry.hpp"
#include "subgeo/scenario.hpp"

using namespace subgeo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
  }
}

void add(Outcome& o, const std::string& what) {
  if (o.pass) o.detail += (o.detail.empty() ? "" : "; ") + what;
}

RateProfile sqrt_profile() { return RateProfile(RateFunction::polynomial(0.5)); }

TargetSet state_zero(std::size_t n) { return TargetSet::states(n, std::vector<std::size_t>{0}); }

PsiFunction two_state_psi(const RateProfile& p) {
  const auto v = LyapunovCandidate::on_states({1.0, 4.0});
  return build_psi_from_v(v, p, check_subgeometric_drift(two_state_symmetric(), v, p));
}

// flagship: bd_polynomial(3, 200), V(n) = (n+1)^3.5, alpha certified with C inside {0..20}
struct Flagship {
  Ctmc chain = bd_polynomial(3.0, 200);
  LyapunovCandidate v;
  FeasibleExponent best;

  Flagship() : v(make_v()), best(certify()) {}

  static LyapunovCandidate make_v() {
    std::vector<double> vals(201);
    for (std::size_t n = 0; n < vals.size(); ++n) vals[n] = std::pow(static_cast<double>(n + 1), 3.5);
    return LyapunovCandidate::on_states(vals);
  }
  FeasibleExponent certify() const {
    DriftOptions d;
    d.max_state = 20;
    return largest_feasible_exponent(chain, v, d);
  }
};

Outcome rate_machinery() {
  Outcome o;
  const auto times = numerics::linspace(0.0, 100.0, 1001);
  const auto us = numerics::logspace(1.0, 1e6, 121);
  double worst_inv = 0.0, worst_rt = 0.0;
  for (double a : {0.3, 0.5, 0.7}) {
    const RateProfile closed(RateFunction::polynomial(a), InverseMethod::ClosedForm);
    const RateProfile ode(RateFunction::polynomial(a), InverseMethod::OdeIntegrate);
    const RateProfile bis(RateFunction::polynomial(a), InverseMethod::BisectOnQuadrature);
    for (double t : times) {
      const double c = closed.h_phi_inv(t);
      worst_inv = std::max({worst_inv, std::abs(ode.h_phi_inv(t) - c) / c,
                            std::abs(bis.h_phi_inv(t) - c) / c});
    }
    for (const auto* p : {&closed, &ode, &bis})
      for (double u : us) worst_rt = std::max(worst_rt, std::abs(p->h_phi_inv(p->h_phi(u)) - u) / u);
  }
  require(o, worst_inv <= 1e-6, "inverse methods differ by " + fmt("%.3g", worst_inv));
  require(o, worst_rt <= 1e-7, "round trip error " + fmt("%.3g", worst_rt));
  add(o, "max rel diff between methods " + fmt("%.2g", worst_inv) + ", max round-trip error " +
             fmt("%.2g", worst_rt));
  return o;
}

Outcome rate_inequalities() {
  Outcome o;
  std::vector<std::pair<std::string, RateProfile>> rates;
  for (double a : {0.3, 0.5, 0.7})
    rates.emplace_back(fmt("poly(%.1f)", a), RateProfile(RateFunction::polynomial(a)));
  rates.emplace_back("log_smoothed", RateProfile(RateFunction::log_smoothed()));
  RateSpec sq;
  sq.kind = "custom";
  sq.function = "sqrt";
  rates.emplace_back("sqrt", make_profile(sq));

  std::size_t rows = 0;
  for (const auto& [name, p] : rates) {
    const auto reps = rate_checks(p, 1);
    for (const auto& r : reps) {
      if (r.name() != "submultiplicative" && r.name() != "scaling") continue;
      rows += r.rows().size();
      require(o, r.rows().size() == 10000, name + " " + r.name() + " has " +
                                               std::to_string(r.rows().size()) + " rows");
      require(o, r.violation_count() == 0 && r.passed(),
              name + " " + r.name() + ": " + std::to_string(r.violation_count()) + " violations");
    }
  }
  add(o, std::to_string(rates.size()) + " rates, " + std::to_string(rows) + " rows, 0 violations");
  return o;
}

Outcome construction_from_v() {
  Outcome o;
  const auto p = sqrt_profile();
  const auto m = two_state_symmetric();
  const auto v = LyapunovCandidate::on_states({1.0, 4.0});
  DriftOptions d;
  d.target = state_zero(2);
  const auto cert = check_subgeometric_drift(m, v, p, d);
  require(o, cert.passed, "drift certificate");
  require(o, cert.K == 4.0, "K = " + fmt("%.17g", cert.K));
  const auto psi = build_psi_from_v(v, p, cert);
  require(o, psi(0.0, 0.0) == 1.0 && psi(0.0, 1.0) == 7.0,
          "psi(0,.) = (" + fmt("%.17g", psi(0.0, 0.0)) + ", " + fmt("%.17g", psi(0.0, 1.0)) + ")");
  const auto grid = numerics::linspace(0.0, 20.0, 201);
  const auto rep = check_condition2(m, psi, p, cert.target, grid, 0.025);
  require(o, rep.passed(), "condition check: " + rep.summary_line());
  const double worst = rep.constant("worst_residual").value_or(INFINITY);
  require(o, worst <= 1e-3, "worst residual " + fmt("%.3g", worst));
  add(o, "K = 4, psi(0,.) = 2V-1, " + std::to_string(rep.rows().size()) +
             " rows, worst residual " + fmt("%.3g", worst));
  return o;
}

Outcome calibration_absorbing() {
  Outcome o;
  const HittingSampler s(absorbing(), state_zero(1), 1.0, 2024);
  const auto e = estimate_hitting_moment(s, 0.0, sqrt_profile(), 100000);
  const double z = std::abs(e.mean - 2.5) / e.std_error;
  require(o, z <= 3.0 && !e.unreliable, "mean " + fmt("%.6g", e.mean) + ", " + fmt("%.2f", z) + " SE");
  add(o, "mean " + fmt("%.5f", e.mean) + " vs 2.5, SE " + fmt("%.2g", e.std_error) + ", |z| " +
             fmt("%.2f", z));
  return o;
}

struct Triple {
  std::string label;
  HittingSampler sampler;
  double x0;
};

Outcome occupation_identity() {
  // the identity holds for every clock rate; r = 4 keeps the right-side
  // integrals short enough for 1e5 Euler paths per diffusion
  constexpr double kClock = 4.0;
  Outcome o;
  const auto p = sqrt_profile();
  std::vector<Triple> cases;
  const auto c_ou = TargetSet::interval(-1.0, 1.0);
  cases.push_back({"two_state", HittingSampler(two_state_symmetric(), state_zero(2), kClock, 101),
                   1.0});
  cases.push_back({"bd_geometric",
                   HittingSampler(bd_geometric(1.0, 3.0, 100), state_zero(101), kClock, 102), 5.0});
  cases.push_back({"bd_polynomial",
                   HittingSampler(bd_polynomial(3.0, 200), state_zero(201), kClock, 103), 5.0});
  cases.push_back({"ou", HittingSampler(ou(1.0), c_ou, kClock, 104), 2.0});
  cases.push_back({"heavy_tail_langevin",
                   HittingSampler(heavy_tail_langevin(1.0), c_ou, kClock, 105),
                   2.0});
  const std::vector<TestFunction> fs{TestFunction::identity(), TestFunction::one_minus_exp(),
                                     TestFunction::h_inv_minus_one(p)};
  double worst_z = 0.0;
  std::size_t n = 0;
  for (const auto& c : cases) {
    const auto reps = occupation_identity_checks(c.sampler, c.x0, fs, 100000);
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const auto& rep = reps[k];
      const double l = *rep.constant("left"), r = *rep.constant("right");
      const double combined = std::hypot(*rep.constant("left_se"), *rep.constant("right_se"));
      const double z = combined > 0.0 ? std::abs(l - r) / combined : (l == r ? 0.0 : INFINITY);
      worst_z = std::max(worst_z, z);
      require(o, rep.passed() && z <= 3.0,
              c.label + "/" + fs[k].name + ": " + rep.summary_line() + ", combined |z| " +
                  fmt("%.2f", z));
      ++n;
    }
  }
  add(o, std::to_string(n) + " model/C/f triples at r = 4, worst |left-right| / combined SE " +
             fmt("%.2f", worst_z));
  return o;
}

Outcome quantitative_chain() {
  Outcome o;
  const auto p = sqrt_profile();
  const auto psi = two_state_psi(p);
  const HittingSampler s(two_state_symmetric(), state_zero(2), 1.0, 7);
  const std::vector<double> xs{0.0, 1.0};
  const auto step1 = check_step1_bound(s, psi, p, xs, 100000);
  require(o, step1.passed(), "step 1: " + step1.summary_line());
  const auto cal = calibrate_r(s, psi, p, 100000);
  require(o, cal.report.passed(), "step 3 gate: " + cal.report.summary_line());
  const double kappa = psi.kappa();
  require(o, cal.r0 == 2 * kappa * std::log(4 * kappa), "r0");
  const auto a = estimate_A_functional(s.with_r(cal.r0), 0.0, 0.0, p, 100000, 1e4);
  require(o, !a.unreliable && a.mean <= 4 * kappa + 3 * a.std_error,
          "step 4: A = " + fmt("%.6g", a.mean) + " vs 4 kappa = " + fmt("%.6g", 4 * kappa));
  add(o, "kappa " + fmt("%.4g", kappa) + ", r0 " + fmt("%.4g", cal.r0) + ", gate " +
             fmt("%.4f", *cal.report.constant("sup_gate")) + " <= 0.5, A " + fmt("%.4f", a.mean) +
             " <= " + fmt("%.4g", 4 * kappa));
  return o;
}

Outcome tau_delta(const Flagship& fl) {
  Outcome o;
  std::size_t rows = 0;
  double tightest = 0.0;
  const auto ratio = [&](const CheckReport& rep) {
    tightest = std::max(tightest, *rep.constant("mean") / *rep.constant("bound"));
  };
  {
    const auto p = sqrt_profile();
    const auto psi = two_state_psi(p);
    const HittingSampler s(two_state_symmetric(), state_zero(2), 1.0, 7);
    for (double x : {0.0, 1.0}) {
      const auto rep = check_tau_delta_bound(s, x, psi, p, 1.0, 100000);
      require(o, rep.passed(), "two_state x=" + fmt("%g", x) + ": " + rep.summary_line());
      ratio(rep);
      ++rows;
    }
  }
  {
    const RateProfile p(RateFunction::polynomial(fl.best.alpha));
    const auto& cert = fl.best.certificate;
    const auto psi = build_psi_from_v(fl.v, p, cert);
    const HittingSampler s(fl.chain, cert.target, 1.0, 1);
    std::size_t max_c = 0;
    for (std::size_t x = 0; x < fl.chain.size(); ++x)
      if (cert.target.contains(x)) max_c = x;
    for (std::size_t x = 0; x <= max_c + 2; ++x) {
      const auto rep = check_tau_delta_bound(s, static_cast<double>(x), psi, p, 1.0, 100000);
      require(o, rep.passed(), "bd_polynomial x=" + std::to_string(x) + ": " + rep.summary_line());
      ratio(rep);
      ++rows;
    }
  }
  add(o, std::to_string(rows) + " starting states over two_state and bd_polynomial(3,200), " +
             "1e5 paths each, largest mean/bound " + fmt("%.3f", tightest));
  return o;
}

Outcome convergence(const Flagship& fl) {
  Outcome o;
  const double alpha = fl.best.alpha;
  const RateProfile p(RateFunction::polynomial(alpha));
  const auto ts = numerics::logspace(1.0, 1e5, 40);
  const auto big = bd_polynomial(3.0, 400);

  // Poisson truncation is paid once per uniformization piece; size epsilon
  // so the total stays within 1e-12
  TvOptions opt;
  const double lambda = std::max(fl.chain.max_exit_rate(), big.max_exit_rate());
  const double pieces = std::ceil(ts.back() * lambda / (0.5 * opt.uniformization.max_rate_time));
  opt.uniformization.epsilon = 1e-12 / pieces;
  const double truncation = pieces * opt.uniformization.epsilon;
  require(o, truncation <= 1e-12, "truncation " + fmt("%.3g", truncation));

  const auto a = tv_curve(fl.chain, 0, p, ts, opt);
  const auto b = tv_curve(big, 0, p, ts, opt);
  const auto van = check_vanishing(a, 10.0, 4);
  require(o, van.passed(), "vanishing: " + van.summary_line());
  const auto fit = fit_polynomial_rate(a, 10.0, 1e4);
  const auto rate = check_polynomial_rate(fit, alpha, 0.2);
  require(o, rate.passed(), "slope " + fmt("%.4f", fit.slope) + " vs " +
                                fmt("%.4f", -alpha / (1 - alpha) + 0.2));
  const auto shift = check_truncation_shift(a, b, 1e-3);
  const double max_shift = shift.constant("max_shift").value_or(INFINITY);
  require(o, shift.passed() && max_shift < 1e-3, "N=400 shift " + fmt("%.3g", max_shift));
  add(o, "alpha " + fmt("%.4f", alpha) + ", slope " + fmt("%.3f", fit.slope) + " <= " +
             fmt("%.3f", -alpha / (1 - alpha) + 0.2) + ", truncation " + fmt("%.1g", truncation) +
             ", N=400 shift " + fmt("%.2g", max_shift));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& diff) {
  std::set<std::string> names;
  for (const auto& dir : {a, b})
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
  for (const auto& n : names)
    if (!fs::exists(a / n) || !fs::exists(b / n) || slurp(a / n) != slurp(b / n)) {
      diff = n;
      return false;
    }
  return true;
}

Outcome determinism(const fs::path& scenario_dir, const fs::path& out) {
  Outcome o;
  const auto s = load_scenario(scenario_dir / "bd_polynomial_flagship.json");
  PipelineOptions base;
  base.quiet = true;
  std::vector<fs::path> dirs;
  for (const auto& [name, jobs] : std::vector<std::pair<std::string, int>>{
           {"run1_jobs1", 1}, {"run2_jobs1", 1}, {"run3_jobs8", 8}}) {
    auto opt = base;
    opt.out_dir = out / name;
    opt.jobs = jobs;
    const auto res = run_pipeline(s, opt);
    require(o, res.exit_code == 0, name + " exit " + std::to_string(res.exit_code));
    dirs.push_back(opt.out_dir);
  }
  std::string diff;
  require(o, same_tree(dirs[0], dirs[1], diff), "two runs differ in " + diff);
  require(o, same_tree(dirs[0], dirs[2], diff), "jobs=1 and jobs=8 differ in " + diff);

  // in memory as well: MomentEstimate fields bit for bit
  const Flagship fl;
  HittingSampler one(fl.chain, fl.best.certificate.target, 3.0, 1), eight = one;
  eight.jobs = 8;
  const RateProfile p(RateFunction::polynomial(fl.best.alpha));
  for (double x0 : {0.0, 3.0}) {
    const auto e1 = estimate_hitting_moment(one, x0, p, 20000);
    const auto e8 = estimate_hitting_moment(eight, x0, p, 20000);
    const bool same = std::memcmp(&e1.mean, &e8.mean, sizeof(double)) == 0 &&
                      std::memcmp(&e1.std_error, &e8.std_error, sizeof(double)) == 0 &&
                      e1.censored_fraction == e8.censored_fraction && e1.n_paths == e8.n_paths;
    require(o, same, "MomentEstimate differs at x0=" + fmt("%g", x0));
  }
  add(o, "flagship pipeline twice plus jobs=8: all output files byte-identical; MomentEstimate "
         "bitwise equal for jobs 1 and 8");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  std::string out = "acceptance_out";
  std::string scenarios = SUBGEO_SCENARIO_DIR;
  std::vector<int> only;
  app.add_option("--out", out, "scratch directory for pipeline runs");
  app.add_option("--scenarios", scenarios, "directory holding the bundled scenarios");
  app.add_option("--only", only, "run just these criteria")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<Flagship> flagship;
  const auto fl = [&]() -> const Flagship& {
    if (!flagship) flagship = std::make_unique<Flagship>();
    return *flagship;
  };

  struct Criterion {
    int id;
    const char* title;
    double budget;  // seconds, 0 = none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "rate machinery exactness", 5, rate_machinery},
      {2, "submultiplicativity and scaling", 10, rate_inequalities},
      {3, "psi from V on the two-state chain", 5, construction_from_v},
      {4, "hitting moment on the absorbing chain", 10, calibration_absorbing},
      {5, "occupation identity", 60, occupation_identity},
      {6, "step 1 / step 3 gate / step 4 on two-state", 60, quantitative_chain},
      {7, "tau_C(1) bound", 60, [&] { return tau_delta(fl()); }},
      {8, "flagship convergence", 120, [&] { return convergence(fl()); }},
      {9, "determinism", 0, [&] { return determinism(scenarios, out); }},
  };

  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0 && secs >= c.budget) {
      res.pass = false;
      res.detail += "; over the " + fmt("%g", c.budget) + " s budget";
    }
    std::string timing = fmt("%.2f s", secs);
    if (c.budget > 0) timing += " / " + fmt("%g", c.budget) + " s";
    std::printf("criterion %d %s  %s [%s]: %s\n", c.id, res.pass ? "PASS" : "FAIL", c.title,
                timing.c_str(), res.detail.c_str());
    std::fflush(stdout);
    ++ran;
    if (!res.pass) ++failed;
  }
  std::printf("acceptance: %d/%d passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
