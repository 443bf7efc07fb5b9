#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "subgeo/errors.hpp"
#include "subgeo/hitting.hpp"
#include "subgeo/numerics.hpp"
#include "subgeo/parallel.hpp"
#include "subgeo/registry.hpp"

using namespace subgeo;
using doctest::Approx;

namespace {

RateProfile sqrt_profile() { return RateProfile(RateFunction::polynomial(0.5)); }

TargetSet first_state(std::size_t n) { return TargetSet::states(n, std::vector<std::size_t>{0}); }

HittingSampler absorbing_sampler(double r = 1.0) {
  return HittingSampler(absorbing(), first_state(1), r, 2024);
}

HittingSampler two_state_sampler(double r = 1.0) {
  return HittingSampler(two_state_symmetric(), first_state(2), r, 7);
}

PsiFunction two_state_psi(const RateProfile& p) {
  const auto v = LyapunovCandidate::on_states({1.0, 4.0});
  return build_psi_from_v(v, p, check_subgeometric_drift(two_state_symmetric(), v, p));
}

}  // namespace

TEST_CASE("randomized hitting on the absorbing state") {
  for (double r : {1.0, 2.0}) {
    const auto s = absorbing_sampler(r);
    for (std::size_t i = 0; i < 50; ++i) {
      const double T = s.clock_stream(0.0, i).exponential();
      const auto tau = sample_randomized_hitting(s, 0.0, i);
      REQUIRE(tau);
      CHECK(*tau == Approx(T / r).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS(sample_randomized_hitting(absorbing_sampler(), 1.0, 0), DimensionError);
  CHECK_THROWS(HittingSampler(absorbing(), first_state(1), 0.0, 1));
}

TEST_CASE("two-state mean of the randomized hitting time") {
  // E[tau~] = E[T] + (expected excursions while occupation grows to T) * 1 = 2
  const auto s = two_state_sampler();
  std::vector<double> v(100000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = *sample_randomized_hitting(s, 0.0, i);
  const auto sum = summarize(v);
  CHECK(std::abs(sum.mean - 2.0) <= 3 * sum.std_error);
}

TEST_CASE("hitting moments") {
  const auto p = sqrt_profile();
  SUBCASE("absorbing, r = 1: E[(1+T/2)^2] = 2.5") {
    const auto e = estimate_hitting_moment(absorbing_sampler(), 0.0, p, 100000);
    CHECK(std::abs(e.mean - 2.5) <= 3 * e.std_error);
    CHECK(e.censored_fraction == 0.0);
    CHECK_FALSE(e.unreliable);
  }
  SUBCASE("large r sends the moment to H^{-1}(0) = 1") {
    const auto e = estimate_hitting_moment(absorbing_sampler(1e6), 0.0, p, 1000);
    CHECK(e.mean == Approx(1.0).epsilon(1e-5));
  }
  SUBCASE("state never in C is censored") {
    auto s = HittingSampler(two_state_symmetric(), TargetSet::mask({0, 0}), 1.0, 3);
    s.horizon_cap = 50.0;
    const auto e = estimate_hitting_moment(s, 0.0, p, 200);
    CHECK(e.censored_fraction == 1.0);
    CHECK(e.unreliable);
    CHECK(e.mean == Approx(p.h_phi_inv(50.0)));
  }
  CHECK_THROWS(estimate_hitting_moment(absorbing_sampler(), 0.0, p, 10));
}

TEST_CASE("occupation identity") {
  const auto p = sqrt_profile();
  SUBCASE("absorbing, f(s) = s: both sides estimate 1") {
    const auto rep = occupation_identity_check(absorbing_sampler(), 0.0, TestFunction::identity(),
                                               20000);
    CHECK(rep.passed());
    CHECK(rep.constant("right").value() == Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(rep.constant("left").value() - 1.0) <= 3 * rep.constant("left_se").value());
  }
  SUBCASE("f = 0") {
    const auto rep = occupation_identity_check(two_state_sampler(), 1.0, TestFunction::zero(), 500);
    CHECK(rep.passed());
    CHECK(rep.constant("left").value() == 0.0);
    CHECK(rep.constant("right").value() == 0.0);
  }
  SUBCASE("two-state, f = H^{-1} - 1") {
    for (double x0 : {0.0, 1.0}) {
      const auto rep = occupation_identity_check(two_state_sampler(), x0,
                                                 TestFunction::h_inv_minus_one(p), 100000);
      CHECK(rep.passed());
      CHECK(rep.constant("censored_fraction").value() == 0.0);
    }
  }
  SUBCASE("birth-death chain, f = 1 - e^{-s} and f = s") {
    const HittingSampler s(bd_geometric(1.0, 2.0, 30), first_state(31), 0.5, 11);
    for (const auto& f : {TestFunction::one_minus_exp(), TestFunction::identity()})
      CHECK(occupation_identity_check(s, 5.0, f, 20000).passed());
  }
  SUBCASE("OU on an interval, f(s) = s") {
    HittingSampler s(ou(1.0, -10, 10, 2e-2), TargetSet::interval(-1.0, 1.0), 1.0, 5);
    s.jobs = 4;
    CHECK(occupation_identity_check(s, 2.0, TestFunction::identity(), 2000).passed());
    CHECK(occupation_identity_check(s, 0.0, TestFunction::h_inv_minus_one(p), 2000).passed());
  }
}

TEST_CASE("several test functions on one set of paths") {
  const auto p = sqrt_profile();
  const HittingSampler s(bd_geometric(1.0, 2.0, 30), first_state(31), 2.0, 17);
  const std::vector<TestFunction> fs{TestFunction::identity(), TestFunction::one_minus_exp(),
                                     TestFunction::h_inv_minus_one(p)};
  const auto all = occupation_identity_checks(s, 4.0, fs, 3000);
  REQUIRE(all.size() == 3);
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const auto one = occupation_identity_check(s, 4.0, fs[k], 3000);
    CHECK(all[k].passed());
    CHECK(all[k].name() == one.name());
    CHECK(all[k].constant("left").value() == one.constant("left").value());
    CHECK(all[k].constant("right").value() == one.constant("right").value());
  }
}

TEST_CASE("clock monotonicity in r under common random numbers") {
  for (const auto& s0 : {two_state_sampler(), HittingSampler(bd_geometric(1.0, 1.5, 20),
                                                             first_state(21), 1.0, 4)}) {
    for (std::size_t i = 0; i < 1000; ++i) {
      double prev = std::numeric_limits<double>::infinity();
      for (double r : {0.25, 0.5, 1.0, 2.0, 8.0}) {
        const auto tau = sample_randomized_hitting(s0.with_r(r), static_cast<double>(i % 2), i);
        REQUIRE(tau);
        CHECK(*tau <= prev);
        prev = *tau;
      }
    }
  }
}

TEST_CASE("exact crossing matches a fine grid scan") {
  // Brute force: step the occupation of an independently generated
  // trajectory on a grid until it exceeds T / r. Each jump costs the scan up
  // to one cell, so the grid is 1e-7 to resolve 1e-6 over several jumps.
  const auto s = two_state_sampler(1.5);
  const auto& m = std::get<Ctmc>(*s.model);
  const double step = 1e-7;
  for (std::size_t i = 0; i < 100; ++i) {
    const double x0 = static_cast<double>(i % 2);
    const auto tau = sample_randomized_hitting(s, x0, i);
    REQUIRE(tau);
    Stream path = s.path_stream(x0, i);
    const auto traj = sample_path(m, i % 2, *tau + 1.0, path);
    const double threshold = s.clock_stream(x0, i).exponential() / s.r;
    long occ = 0;  // in grid steps, so the sum is exact
    std::size_t k = 0;
    long n = 0;
    for (;; ++n) {
      const double t = (static_cast<double>(n) + 0.5) * step;
      while (k + 1 < traj.times.size() && traj.times[k + 1] <= t) ++k;
      if (traj.states[k] == 0) ++occ;
      if (static_cast<double>(occ) * step >= threshold) break;
    }
    CHECK(std::abs(static_cast<double>(n + 1) * step - *tau) <= 1e-6);
  }
}

TEST_CASE("psi via hitting") {
  const auto p = sqrt_profile();
  const auto ts = numerics::linspace(0.0, 20.0, 201);
  SUBCASE("absorbing: u(0) = 2.5, corrected 2u - 1 = 4") {
    const std::vector<std::size_t> st{0};
    const auto lit = psi_via_hitting(absorbing_sampler(), p, ts, st, 100000, HittingForm::Literal);
    const auto cor = psi_via_hitting(absorbing_sampler(), p, ts, st, 100000);
    CHECK(std::abs(lit(0.0, 0.0) - 2.5) <= 3 * lit.std_error(0.0, 0.0));
    CHECK(std::abs(cor(0.0, 0.0) - 4.0) <= 3 * cor.std_error(0.0, 0.0));
    CHECK(cor(0.0, 0.0) == Approx(2 * lit(0.0, 0.0) - 1.0));
    CHECK(lit.eta() == p.phi(1.0));
    CHECK(lit.kappa_sup() == Approx(lit(0.0, 0.0) + 3 * lit.std_error(0.0, 0.0)));
    for (double t : ts) {
      CHECK(lit(t, 0.0) >= p.h_phi_inv(t));
      CHECK(cor(t, 0.0) >= p.h_phi_inv(t));
      CHECK(lit(t, 0.0) <= p.h_phi_inv(t) * lit(0.0, 0.0) + 3 * lit.std_error(t, 0.0));
    }
  }
  SUBCASE("two-state: the literal form fails off C, the corrected form passes") {
    const std::vector<std::size_t> st{0, 1};
    const auto c0 = first_state(2);
    const auto s = two_state_sampler();
    const auto& m = std::get<Ctmc>(*s.model);
    const auto lit = psi_via_hitting(s, p, ts, st, 20000, HittingForm::Literal);
    const auto rl = check_condition2(m, lit, p, c0, ts, 0.1);
    CHECK_FALSE(rl.passed());
    for (const auto& row : rl.rows())
      if (!row.ok) {
        CHECK(row.predicate == "(d_t+L)psi<=kappa*Hinv*1_C-phi(Hinv)");
        CHECK(row.at[1] == 1.0);
      }
    const auto cor = psi_via_hitting(s, p, ts, st, 20000);
    const auto rc = check_condition2(m, cor, p, c0, ts, 0.1);
    CHECK(rc.passed());
    for (double t : ts)
      for (double x : {0.0, 1.0}) CHECK(cor(t, x) >= p.h_phi_inv(t));
  }
  SUBCASE("censored C-state is rejected") {
    auto s = HittingSampler(two_state_symmetric(), TargetSet::mask({0, 0}), 1.0, 3);
    s.horizon_cap = 10.0;
    const std::vector<std::size_t> st{0};
    const auto s2 = HittingSampler(two_state_symmetric(), first_state(2), 1.0, 3);
    auto s3 = s2;
    s3.horizon_cap = 1e-3;
    CHECK_THROWS_AS(psi_via_hitting(s3, p, ts, st, 200), UnreliableEstimateError);
  }
}

TEST_CASE("tau1") {
  const auto a = absorbing();
  const auto c = first_state(1);
  Stream rng(1, 2);
  CHECK(*sample_tau1(a, 0.0, c, 1.0, rng) == 0.5);
  CHECK(*sample_tau1(a, 0.0, c, 4.0, rng) == 0.125);
  const auto s = two_state_sampler();
  const auto& m = *s.model;
  for (std::size_t i = 0; i < 2000; ++i) {
    PathWalker w(m, s.target, 1.0, s.path_stream(1.0, i));
    const double entry = w.next().end;
    CHECK(*sample_tau1(m, 1.0, s.target, 1.0, s.path_stream(1.0, i)) >= entry + 0.5);
  }
  CHECK_THROWS(sample_tau1(a, 0.0, c, 0.0, rng));
}

TEST_CASE("step 1 bound") {
  const auto p = sqrt_profile();
  SUBCASE("two-state with psi from V") {
    const auto psi = two_state_psi(p);
    const std::vector<double> xs{0.0, 1.0};
    const auto rep = check_step1_bound(two_state_sampler(), psi, p, xs, 100000);
    CHECK(rep.passed());
  }
  SUBCASE("absorbing with psi from hitting: deterministic H^{-1}(1/(2 kappa))") {
    const std::vector<std::size_t> st{0};
    const auto ts = numerics::linspace(0.0, 1.0, 3);
    const auto psi = psi_via_hitting(absorbing_sampler(), p, ts, st, 100000,
                                     HittingForm::Literal);
    const std::vector<double> xs{0.0};
    const auto rep = check_step1_bound(absorbing_sampler(), psi, p, xs, 1000);
    CHECK(rep.passed());
    CHECK(rep.series().at("mean")[0] == Approx(p.h_phi_inv(0.5 / psi.kappa())).epsilon(1e-14));
    CHECK(rep.series().at("std_error")[0] == Approx(0.0).epsilon(1e-14));
    CHECK(rep.series().at("bound")[0] <= 5.0 + 1e-2);
  }
  SUBCASE("floor case: psi(0,.) = 1 gives the bound 2, mean >= 1") {
    const auto flat = PsiFunction::custom([&](double t, double) { return p.h_phi_inv(t); }, p,
                                          1.0, 1.0, p.phi(1.0));
    const std::vector<double> xs{0.0};
    const auto rep = check_step1_bound(absorbing_sampler(), flat, p, xs, 100);
    CHECK(rep.passed());
    CHECK(rep.series().at("mean")[0] >= 1.0);
    CHECK(rep.series().at("bound")[0] == 2.0);
  }
}

TEST_CASE("A functional") {
  const auto p = sqrt_profile();
  SUBCASE("large rho: Laplace approximation") {
    const double rho = 1e6;
    const auto e = estimate_A_functional(absorbing_sampler(), 0.0, rho, p, 100, 0.05);
    CHECK(e.mean == Approx(p.phi(1.0) * std::sqrt(M_PI / rho) / 2).epsilon(2e-3));
    CHECK(e.std_error == Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(estimate_A_functional(absorbing_sampler(), 0.0, rho, p, 100, 1e-3),
                    TailBoundError);
  }
  SUBCASE("absorbing, rho = 0: int e^{-s}(1+s/2) ds = 1.5") {
    const auto e = estimate_A_functional(absorbing_sampler(), 0.0, 0.0, p, 100, 1e3);
    CHECK(e.mean == Approx(1.5).epsilon(1e-9));
    CHECK(e.censored_fraction == 0.0);
  }
  SUBCASE("short horizon censors at rho = 0") {
    const auto e = estimate_A_functional(two_state_sampler(), 1.0, 0.0, p, 200, 0.5);
    CHECK(e.censored_fraction > 0.5);
    CHECK(e.unreliable);
  }
}

TEST_CASE("calibrate r") {
  const auto p = sqrt_profile();
  const auto unit = [](double) { return 1.0; };
  for (double kappa : {1.0, 4.0}) {
    const auto psi = PsiFunction::custom([&](double t, double) { return p.h_phi_inv(t) * unit(t); },
                                         p, kappa, kappa, p.phi(1.0));
    const auto cal = calibrate_r(absorbing_sampler(), psi, p, 200);
    CHECK(cal.r0 == Approx(2 * kappa * std::log(4 * kappa)).epsilon(1e-15));
    CHECK(cal.report.passed());
    CHECK(cal.tightened <= cal.r0);
  }
  CHECK(2 * std::log(4.0) == Approx(2.7726).epsilon(1e-4));
  CHECK(8 * std::log(16.0) == Approx(22.18).epsilon(1e-3));

  SUBCASE("two-state gate and step 4 at r0") {
    const auto psi = two_state_psi(p);
    const auto s = two_state_sampler();
    const auto cal = calibrate_r(s, psi, p, 100000);
    CHECK(cal.report.passed());
    CHECK(cal.report.constant("sup_gate").value() <= 0.5);
    const auto a = estimate_A_functional(s.with_r(cal.r0), 0.0, 0.0, p, 100000, 1e4);
    CHECK(a.mean <= 4 * psi.kappa() + 3 * a.std_error);
    CHECK(a.censored_fraction == 0.0);
  }
}

TEST_CASE("tau_C(delta) bound") {
  const auto p = sqrt_profile();
  SUBCASE("absorbing in C, delta = 1: left side 1.25") {
    const auto psi = PsiFunction::custom([&](double t, double) { return p.h_phi_inv(t); }, p,
                                         1.0, 1.0, p.phi(1.0));
    const auto rep = check_tau_delta_bound(absorbing_sampler(), 0.0, psi, p, 1.0, 100);
    CHECK(rep.constant("mean").value() == Approx(1.25).epsilon(1e-14));
    CHECK(rep.passed());
    const auto tiny = check_tau_delta_bound(absorbing_sampler(), 0.0, psi, p, 1e-12, 100);
    CHECK(tiny.constant("mean").value() == Approx(0.0).epsilon(1e-10));
    CHECK(tiny.passed());
  }
  SUBCASE("two-state from outside C") {
    const auto psi = two_state_psi(p);
    const auto rep = check_tau_delta_bound(two_state_sampler(), 1.0, psi, p, 1.0, 100000);
    CHECK(rep.passed());
  }
  Stream rng(1, 1);
  CHECK_THROWS(sample_tau_delta(absorbing(), first_state(1), 0.0, 0.0, 10.0, rng));
}

TEST_CASE("estimates do not depend on the worker count") {
  const auto p = sqrt_profile();
  auto a = HittingSampler(bd_geometric(1.0, 2.0, 40), first_state(41), 0.7, 99);
  auto b = a;
  a.jobs = 1;
  b.jobs = 8;
  const auto ea = estimate_hitting_moment(a, 6.0, p, 5000);
  const auto eb = estimate_hitting_moment(b, 6.0, p, 5000);
  CHECK(ea.mean == eb.mean);
  CHECK(ea.std_error == eb.std_error);
  const auto ia = occupation_identity_check(a, 3.0, TestFunction::h_inv_minus_one(p), 2000);
  const auto ib = occupation_identity_check(b, 3.0, TestFunction::h_inv_minus_one(p), 2000);
  CHECK(ia.constant("left").value() == ib.constant("left").value());
  CHECK(ia.constant("right").value() == ib.constant("right").value());
}
