#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "subgeo/drift.hpp"
#include "subgeo/errors.hpp"
#include "subgeo/numerics.hpp"
#include "subgeo/registry.hpp"

using namespace subgeo;
using doctest::Approx;

namespace {

RateProfile sqrt_profile() { return RateProfile(RateFunction::polynomial(0.5)); }

std::vector<double> power_v(std::size_t n, double p) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(static_cast<double>(i + 1), p);
  return v;
}

// Row-by-row dense generator, independent of the CSR path.
std::vector<double> dense_apply(const Ctmc& m, const std::vector<double>& f) {
  const auto q = m.dense();
  const std::size_t n = m.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += q[i * n + j] * f[j];
  return out;
}

}  // namespace

TEST_CASE("geometric drift") {
  const auto two = two_state_symmetric();
  const auto ones = LyapunovCandidate::on_states({1.0, 1.0});
  const auto c0 = TargetSet::states(2, std::vector<std::size_t>{0});
  const auto rep = check_geometric_drift(two, ones, c0, 0.5, 1.0);
  CHECK_FALSE(rep.passed());
  REQUIRE(rep.first_violation());
  CHECK(rep.first_violation()->at[0] == 1.0);

  const auto bd = bd_geometric(1.0, 3.0, 100);
  std::vector<double> v(101);
  for (int n = 0; n <= 100; ++n) v[static_cast<std::size_t>(n)] = std::pow(2.0, n);
  CHECK(check_geometric_drift(bd, LyapunovCandidate::on_states(v),
                              TargetSet::states(101, std::vector<std::size_t>{0}), 0.5, 2.0)
            .passed());

  std::vector<std::size_t> all{0, 1};
  CHECK(check_geometric_drift(two, ones, TargetSet::states(2, all), 1.0, 2.0).passed());
  CHECK_THROWS_AS(check_geometric_drift(bd, ones, c0, 0.5, 1.0), DimensionError);
}

TEST_CASE("subgeometric drift with automatic C and K") {
  const auto two = two_state_symmetric();
  const auto v = LyapunovCandidate::on_states({1.0, 4.0});
  const auto cert = check_subgeometric_drift(two, v, sqrt_profile());
  CHECK(cert.passed);
  CHECK(cert.target.members() == std::vector<std::size_t>{0});
  CHECK(cert.K == Approx(4.0).epsilon(1e-15));
  CHECK(cert.generator[0] == 3.0);
  CHECK(cert.generator[1] == -3.0);

  SUBCASE("minimality of the automatic K") {
    DriftOptions o;
    o.target = cert.target;
    o.K = cert.K - 10 * o.tolerance;
    CHECK_FALSE(check_subgeometric_drift(two, v, sqrt_profile(), o).passed);
  }
  SUBCASE("constant V with C = all and K = 1") {
    DriftOptions o;
    o.target = TargetSet::states(2, std::vector<std::size_t>{0, 1});
    o.K = 1.0;
    const auto c = check_subgeometric_drift(two, LyapunovCandidate::on_states({1.0, 1.0}),
                                            sqrt_profile(), o);
    CHECK(c.passed);
    CHECK(c.residuals[0] == 0.0);
  }
  CHECK_THROWS_AS(LyapunovCandidate::on_states({0.5, 2.0}), DomainError);
}

TEST_CASE("bd_polynomial drift") {
  const auto bd = bd_polynomial(3.0, 200);
  SUBCASE("V = n+1 cannot certify any polynomial rate") {
    // LV(n) = -3/n while phi(n+1) >= 1, so every state violates and the
    // automatic C reaches the truncation level.
    const auto v = LyapunovCandidate::on_states(power_v(201, 1.0));
    for (double a : {0.05, 0.3, 0.7})
      CHECK_THROWS_AS(check_subgeometric_drift(bd, v, RateProfile(RateFunction::polynomial(a))),
                      AutoTargetError);
  }
  SUBCASE("V = (n+1)^3.5 certifies alpha just below 0.46") {
    const auto v = LyapunovCandidate::on_states(power_v(201, 3.5));
    DriftOptions o;
    o.max_state = 20;
    const auto best = largest_feasible_exponent(bd, v, o);
    CHECK(best.alpha > 0.44);
    CHECK(best.alpha < 0.47);
    CHECK(best.certificate.passed);
    const auto members = best.certificate.target.members();
    REQUIRE_FALSE(members.empty());
    CHECK(members.back() <= 20);
    CHECK(std::isfinite(best.certificate.K));

    // soundness: independent dense generator reproduces the residuals
    const auto lv = dense_apply(bd, v.values());
    const RateProfile p(RateFunction::polynomial(best.alpha));
    for (std::size_t i = 0; i <= 200; ++i) {
      const double k = best.certificate.target.contains(i) ? best.certificate.K : 0.0;
      CHECK(lv[i] + p.phi(v[i]) - k <= 2 * best.certificate.tolerance + 1e-12 * v[i]);
    }
    // just above the bisection result the certificate is gone
    CHECK_THROWS_AS(check_subgeometric_drift(bd, v,
                                             RateProfile(RateFunction::polynomial(best.alpha + 1e-3)), o),
                    AutoTargetError);
  }
}

TEST_CASE("build_psi_from_v") {
  const auto p = sqrt_profile();
  const auto two = two_state_symmetric();
  const auto v = LyapunovCandidate::on_states({1.0, 4.0});
  const auto cert = check_subgeometric_drift(two, v, p);
  const auto psi = build_psi_from_v(v, p, cert);
  CHECK(psi(0.0, 1.0) == Approx(7.0).epsilon(1e-14));
  CHECK(psi(2.0, 1.0) == Approx(14.0).epsilon(1e-14));
  CHECK(psi(0.0, 0.0) == 1.0);
  CHECK(psi.kappa_sup() == 1.0);
  CHECK(psi.kappa_drift() == Approx(8.0));
  CHECK(psi.kappa() == Approx(8.0));
  CHECK(psi.eta() == 2.0);
  for (double x : {0.0, 1.0}) CHECK(psi(0.0, x) == Approx(2 * v.at(x) - 1).epsilon(1e-14));

  // psi_0(t, .) = H^{-1}(H(.) + t) is non-decreasing and secant-concave
  for (double t : {0.0, 0.5, 3.0, 20.0}) {
    auto psi0 = [&](double x) { return p.h_phi_inv(p.h_phi(x) + t); };
    for (double x = 1.0; x < 60.0; x *= 1.7) {
      const double y = x * 1.3, z = x * 1.9;
      CHECK(psi0(x) <= psi0(y));
      CHECK((psi0(y) - psi0(x)) / (y - x) >= (psi0(z) - psi0(y)) / (z - y) - 1e-12);
    }
  }
}

TEST_CASE("Condition 2 for psi built from V") {
  const auto two = two_state_symmetric();
  const auto v = LyapunovCandidate::on_states({1.0, 4.0});
  const auto grid = numerics::linspace(0.0, 20.0, 201);
  const auto c0 = TargetSet::states(2, std::vector<std::size_t>{0});

  SUBCASE("closed-form rate, analytic time derivative") {
    const auto p = sqrt_profile();
    const auto psi = build_psi_from_v(v, p, check_subgeometric_drift(two, v, p));
    const auto rep = check_condition2(two, psi, p, c0, grid, 0.025);
    CHECK(rep.passed());
    CHECK(rep.constant("worst_residual").value() <= 1e-3);
    // the state-0 row at t = 0 is tight: 7 <= 7
    CHECK(rep.rows()[0].lhs == Approx(7.0));
    CHECK(rep.rows()[0].rhs == Approx(7.0));
  }
  SUBCASE("ODE-based rate, differenced time derivative") {
    const RateProfile p(RateFunction::polynomial(0.5), InverseMethod::OdeIntegrate);
    const auto psi = build_psi_from_v(v, p, check_subgeometric_drift(two, v, p));
    const auto rep = check_condition2(two, psi, p, c0, grid, 0.025);
    CHECK(rep.passed());
    CHECK(rep.constant("worst_residual").value() <= 1e-3);
  }
  SUBCASE("log-smoothed rate") {
    const RateProfile p(RateFunction::log_smoothed());
    const auto cert = check_subgeometric_drift(two, v, p);
    REQUIRE(cert.passed);
    const auto psi = build_psi_from_v(v, p, cert);
    CHECK(check_condition2(two, psi, p, cert.target, grid, 0.025).passed());
  }
  SUBCASE("psi = H^{-1}(t) alone fails the L psi(0) clause") {
    const auto p = sqrt_profile();
    const auto flat = PsiFunction::custom([&](double t, double) { return p.h_phi_inv(t); }, p,
                                          1.0, 1.0, p.phi(1.0));
    const auto empty = TargetSet::mask({0, 0});
    const auto rep = check_condition2(two, flat, p, empty, grid, 0.025);
    CHECK_FALSE(rep.passed());
    bool clause = false;
    for (const auto& r : rep.rows())
      if (!r.ok && r.predicate == "Lpsi(0,x)<=kappa*1_C-eta") clause = true;
    CHECK(clause);
  }
  SUBCASE("parallel cells give the same report") {
    const auto p = sqrt_profile();
    const auto psi = build_psi_from_v(v, p, check_subgeometric_drift(two, v, p));
    Condition2Options o;
    o.jobs = 4;
    const auto a = check_condition2(two, psi, p, c0, grid, 0.025);
    const auto b = check_condition2(two, psi, p, c0, grid, 0.025, o);
    REQUIRE(a.rows().size() == b.rows().size());
    for (std::size_t i = 0; i < a.rows().size(); ++i) CHECK(a.rows()[i].lhs == b.rows()[i].lhs);
  }
}

TEST_CASE("drift and Condition 2 on the OU diffusion") {
  const auto o = ou(1.0);
  const auto v = LyapunovCandidate::function([](double x) { return 1.0 + x * x; }, "1+x^2");
  const auto p = sqrt_profile();
  DriftOptions opts;
  opts.grid = numerics::linspace(-8.0, 8.0, 161);
  opts.h = 1e-3;
  opts.max_interval = std::pair{-5.0, 5.0};
  const auto cert = check_subgeometric_drift(o, v, p, opts);
  CHECK(cert.passed);
  REQUIRE(cert.target.is_interval());
  // analytic: LV + phi(V) = -2x^2 + 2 + sqrt(1+x^2), positive for |x| < x*
  double lo = 1.0, hi = 2.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (-2 * mid * mid + 2 + std::sqrt(1 + mid * mid) > 0 ? lo : hi) = mid;
  }
  const double edge = std::floor(lo * 10) / 10;  // last grid point inside
  CHECK(cert.target.lo() == Approx(-edge));
  CHECK(cert.target.hi() == Approx(edge));
  CHECK(cert.K == Approx(3.0).epsilon(1e-5));

  const auto psi = build_psi_from_v(v, p, cert);
  const auto ts = numerics::linspace(0.0, 10.0, 41);
  const auto xs = numerics::linspace(-6.0, 6.0, 61);
  const auto rep = check_condition2(o, psi, p, cert.target, ts, xs, 1e-3, 1e-3);
  CHECK(rep.passed());
}
