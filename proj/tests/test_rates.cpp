#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "subgeo/errors.hpp"
#include "subgeo/numerics.hpp"
#include "subgeo/rates.hpp"

using namespace subgeo;
using doctest::Approx;

namespace {

RateProfile sqrt_profile(InverseMethod m = InverseMethod::ClosedForm) {
  return RateProfile(RateFunction::polynomial(0.5), m);
}

std::vector<RateProfile> bundled_profiles() {
  return {RateProfile(RateFunction::polynomial(0.3)), RateProfile(RateFunction::polynomial(0.5)),
          RateProfile(RateFunction::polynomial(0.7)), RateProfile(RateFunction::log_smoothed())};
}

}  // namespace

TEST_CASE("phi_eval on the documented points") {
  const auto p = sqrt_profile();
  CHECK(p.phi(1.0) == 1.0);
  // log/exp oracle for the power
  CHECK(p.phi(4.0) == Approx(std::exp(0.5 * std::log(4.0))).epsilon(1e-15));
  CHECK(p.phi(4.0) == Approx(2.0).epsilon(1e-15));
  const RateProfile log_p(RateFunction::log_smoothed());
  CHECK(log_p.phi(1.0) == 1.0);
  CHECK_THROWS_AS(p.phi(0.5), DomainError);
  CHECK_THROWS_AS(log_p.phi(0.999), DomainError);
}

TEST_CASE("h_phi closed form against quadrature oracles") {
  const auto p = sqrt_profile();
  CHECK(p.h_phi(1.0) == 0.0);
  const double simpson = oracle::simpson([](double s) { return 1.0 / std::sqrt(s); }, 1.0, 4.0);
  CHECK(simpson == Approx(2.0).epsilon(1e-12));
  CHECK(p.h_phi(4.0) == Approx(simpson).epsilon(1e-12));
  CHECK(p.h_phi_quadrature(4.0) == Approx(2.0).epsilon(1e-12));

  const RateProfile log_p(RateFunction::log_smoothed());
  CHECK(log_p.h_phi(1.0) == 0.0);
  for (double u : {1.5, 10.0, 1e3, 1e6}) {
    CHECK(log_p.h_phi(u) == Approx(oracle::h_log_smoothed(u)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(p.h_phi(0.9), DomainError);
}

TEST_CASE("h_phi_inv on the documented points, all three methods") {
  const auto closed = sqrt_profile();
  const auto ode = sqrt_profile(InverseMethod::OdeIntegrate);
  const auto bisect = sqrt_profile(InverseMethod::BisectOnQuadrature);
  for (const auto* p : {&closed, &ode, &bisect}) CHECK(p->h_phi_inv(0.0) == 1.0);

  // ODE oracle: y' = sqrt(y), y(0) = 1
  const double rk = oracle::rk4([](double y) { return std::sqrt(y); }, 1.0, 2.0);
  CHECK(rk == Approx(4.0).epsilon(1e-10));
  CHECK(closed.h_phi_inv(2.0) == Approx(rk).epsilon(1e-10));
  CHECK(ode.h_phi_inv(2.0) == Approx(4.0).epsilon(1e-9));

  // bisection-on-quadrature oracle
  const double bis = oracle::bisect(
      [](double u) {
        return oracle::simpson([](double s) { return 1.0 / std::sqrt(s); }, 1.0, u, 20000);
      },
      4.0, 1.0, 100.0);
  CHECK(bis == Approx(9.0).epsilon(1e-9));
  CHECK(closed.h_phi_inv(4.0) == Approx(bis).epsilon(1e-9));
  CHECK(bisect.h_phi_inv(4.0) == Approx(9.0).epsilon(1e-10));

  CHECK_THROWS_AS(closed.h_phi_inv(-1e-9), DomainError);
}

TEST_CASE("rate_curve is phi composed with H^{-1}") {
  const auto p = sqrt_profile();
  const std::vector<double> times{0.0, 2.0, 4.0};
  const auto r = rate_curve(p, times);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == Approx(2.0).epsilon(1e-14));
  CHECK(r[2] == Approx(3.0).epsilon(1e-14));
  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS(rate_curve(p, bad));
}

TEST_CASE("validate_assumptions") {
  SUBCASE("polynomial alpha=0.5 passes") {
    const std::vector<double> grid{1, 2, 4, 8, 16};
    const auto rep = validate_assumptions(sqrt_profile(), grid);
    CHECK(rep.passed());
  }
  SUBCASE("identity fails strict concavity and ratio decrease") {
    const RateProfile id(RateFunction::custom(
        "identity", [](double x) { return x; }, [](double) { return 1.0; }));
    const std::vector<double> grid{1, 2, 4};
    const auto rep = validate_assumptions(id, grid);
    CHECK_FALSE(rep.passed());
    auto first = rep.first_violation();
    REQUIRE(first);
    bool saw_concavity = false, saw_ratio = false, saw_floor = false;
    for (const auto& row : rep.rows()) {
      if (row.ok) continue;
      saw_concavity |= row.predicate == "secant_concave";
      saw_ratio |= row.predicate == "ratio_decreasing";
      saw_floor |= row.predicate == "gap_growth_floor";
    }
    CHECK(saw_concavity);
    CHECK(saw_ratio);
    CHECK(saw_floor);
  }
  SUBCASE("log-smoothed gap equals ln x") {
    const double e = std::exp(1.0);
    const std::vector<double> grid{1, e, e * e, e * e * e};
    const auto rep = validate_assumptions(RateProfile(RateFunction::log_smoothed()), grid);
    CHECK(rep.passed());
    const auto& gap = rep.series().at("phi_minus_x_dphi");
    REQUIRE(gap.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(gap[i] == Approx(static_cast<double>(i)).epsilon(1e-14));
  }
  SUBCASE("preconditions") {
    const std::vector<double> short_grid{1, 2};
    CHECK_THROWS(validate_assumptions(sqrt_profile(), short_grid));
    const std::vector<double> low{0.5, 2, 3};
    CHECK_THROWS_AS(validate_assumptions(sqrt_profile(), low), DomainError);
  }
}

TEST_CASE("submultiplicativity of H^{-1}") {
  const auto p = sqrt_profile();
  const std::vector<std::pair<double, double>> neutral{{0.0, 7.0}};
  const auto r0 = check_submultiplicative(p, neutral);
  CHECK(r0.passed());
  CHECK(r0.constant("max_ratio").value() == Approx(1.0).epsilon(1e-15));

  const std::vector<std::pair<double, double>> two{{2.0, 2.0}};
  const auto r1 = check_submultiplicative(p, two);
  CHECK(r1.passed());
  CHECK(r1.rows()[0].lhs == Approx(9.0));
  CHECK(r1.rows()[0].rhs == Approx(16.0 * (1 + p.tolerance())));

  // log-smoothed through the ODE route on both sides
  const RateProfile log_p(RateFunction::log_smoothed(), InverseMethod::OdeIntegrate);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<std::pair<double, double>> pairs(1000);
  for (auto& pr : pairs) pr = {u(gen), u(gen)};
  CHECK(check_submultiplicative(log_p, pairs).passed());
  CHECK_THROWS(check_submultiplicative(p, std::vector<std::pair<double, double>>{}));
}

TEST_CASE("scaling inequality phi(kx) <= k phi(x)") {
  const auto p = sqrt_profile();
  const std::vector<std::pair<double, double>> unit{{4.0, 1.0}};
  const auto r = check_scaling(p, unit);
  CHECK(r.passed());
  CHECK(r.rows()[0].lhs == Approx(r.rows()[0].rhs / (1 + p.tolerance())));
  const std::vector<std::pair<double, double>> four{{4.0, 4.0}};
  const auto r4 = check_scaling(p, four);
  CHECK(r4.rows()[0].lhs == Approx(4.0));
  CHECK(r4.rows()[0].rhs == Approx(8.0).epsilon(1e-7));

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ux(1.0, 1e4), uk(1.0, 100.0);
  std::vector<std::pair<double, double>> samples(1000);
  for (auto& s : samples) s = {ux(gen), uk(gen)};
  CHECK(check_scaling(RateProfile(RateFunction::log_smoothed()), samples).passed());
}

TEST_CASE("round trip H^{-1}(H(u)) = u on [1, 1e6]") {
  const auto grid = numerics::logspace(1.0, 1e6, 61);
  for (const auto& p : bundled_profiles()) {
    CAPTURE(p.describe());
    CHECK(check_round_trip(p, grid, 10 * p.tolerance()).passed());
  }
  for (double a : {0.3, 0.5, 0.7}) {
    const RateProfile ode(RateFunction::polynomial(a), InverseMethod::OdeIntegrate);
    const RateProfile bis(RateFunction::polynomial(a), InverseMethod::BisectOnQuadrature);
    CHECK(check_round_trip(ode, grid, 10 * ode.tolerance()).passed());
    CHECK(check_round_trip(bis, grid, 10 * bis.tolerance()).passed());
  }
}

TEST_CASE("inverse methods agree for polynomial rates on [0, 100]") {
  const auto times = numerics::linspace(0.0, 100.0, 101);
  for (double a : {0.3, 0.5, 0.7}) {
    const RateProfile closed(RateFunction::polynomial(a), InverseMethod::ClosedForm);
    const RateProfile ode(RateFunction::polynomial(a), InverseMethod::OdeIntegrate);
    const RateProfile bis(RateFunction::polynomial(a), InverseMethod::BisectOnQuadrature);
    for (double t : times) {
      const double c = closed.h_phi_inv(t);
      CHECK(std::abs(ode.h_phi_inv(t) - c) / c <= 1e-6);
      CHECK(std::abs(bis.h_phi_inv(t) - c) / c <= 1e-6);
    }
  }
}

TEST_CASE("derivative identity, growth envelope and subexponential rate") {
  const auto times = numerics::linspace(0.0, 50.0, 51);
  for (const auto& p : bundled_profiles()) {
    CAPTURE(p.describe());
    CHECK(check_derivative_identity(p, times, 1e-4).passed());
    CHECK(check_growth_envelope(p, numerics::linspace(0.0, 500.0, 101)).passed());
    const auto sub = check_subexponential(p);
    CHECK(sub.passed());
    CHECK(sub.series().at("log_rate_over_t").size() == 18);
  }
}

TEST_CASE("H^{-1} of the identity rate is e^t and saturates instead of producing NaN") {
  const RateProfile id(RateFunction::custom(
                           "identity", [](double x) { return x; }, [](double) { return 1.0; }),
                       InverseMethod::OdeIntegrate);
  CHECK(id.h_phi_inv(3.0) == Approx(std::exp(3.0)).epsilon(1e-9));
  CHECK(std::isinf(id.h_phi_inv(1000.0)));
}

TEST_CASE("tabulated custom rate reproduces sqrt at the knots") {
  std::vector<double> x, f, df;
  for (double v = 1.0; v <= 4096.0; v *= 1.25) {
    x.push_back(v);
    f.push_back(std::sqrt(v));
    df.push_back(0.5 / std::sqrt(v));
  }
  const RateProfile tab(RateFunction::tabulated(x, f, df));
  CHECK(tab.phi(x[7]) == Approx(f[7]).epsilon(1e-14));
  CHECK(tab.phi(3.0) == Approx(std::sqrt(3.0)).epsilon(1e-4));
  CHECK(tab.h_phi_inv(4.0) == Approx(9.0).epsilon(1e-4));
  CHECK_THROWS(RateFunction::tabulated({2.0, 3.0}, {1.0, 1.2}, {0.1, 0.1}));
}

TEST_CASE("construction errors") {
  CHECK_THROWS(RateFunction::polynomial(1.0));
  CHECK_THROWS(RateFunction::polynomial(0.0));
  CHECK_THROWS(RateFunction::polynomial(0.5, -1.0));
  CHECK_THROWS(RateProfile(RateFunction::log_smoothed(), InverseMethod::ClosedForm));
}
