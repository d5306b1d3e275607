#include <doctest.h>

#include <cmath>
#include <vector>

#include "vstar/eos.hpp"
#include "vstar/errors.hpp"

using namespace vstar;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<double> log_samples(double lo, double hi, int n) {
  std::vector<double> s;
  for (int k = 0; k < n; ++k) s.push_back(lo * std::pow(hi / lo, k / double(n - 1)));
  return s;
}

}  // namespace

TEST_SUITE("eos") {

TEST_CASE("polytrope closed forms") {
  const auto eos = make_polytrope({2.5, 5.0 / 3.0});
  for (double s : log_samples(1e-8, 1e4, 25)) {
    CHECK(rel(eos->pressure(s), 2.5 * std::pow(s, 5.0 / 3.0)) < 1e-14);
    CHECK(rel(eos->dpressure(s), 2.5 * 5.0 / 3.0 * std::pow(s, 2.0 / 3.0)) < 1e-14);
    // i = kappa gamma / (gamma - 1) s^{gamma-1}, A = kappa / (gamma - 1) s^{gamma-1}
    CHECK(rel(eos->enthalpy(s), 2.5 * 2.5 * std::pow(s, 2.0 / 3.0)) < 1e-14);
    CHECK(rel(eos->pressure_potential(s), 2.5 * 1.5 * std::pow(s, 2.0 / 3.0)) < 1e-14);
    CHECK(rel(eos->density_from_enthalpy(eos->enthalpy(s)), s) < 1e-13);
  }
  CHECK(eos->pressure(0.0) == 0.0);
  CHECK(eos->enthalpy(0.0) == 0.0);
  CHECK(eos->gamma_bar() == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("enthalpy and potential agree with quadrature") {
  const std::vector<EosPtr> laws = {make_polytrope({1.0, 1.4}), make_polytrope({0.7, 2.5}),
                                    make_white_dwarf({1.0, 1.0}), make_white_dwarf({2.0, 0.5})};
  for (const auto& eos : laws) {
    for (double s : log_samples(1e-6, 1e6, 13)) {
      CAPTURE(eos->name());
      CAPTURE(s);
      CHECK(rel(eos->enthalpy(s), enthalpy_by_quadrature(*eos, s)) < 1e-10);
      CHECK(rel(eos->pressure_potential(s), pressure_potential_by_quadrature(*eos, s)) < 1e-10);
      // i = p / s + A
      CHECK(rel(eos->enthalpy(s), eos->pressure(s) / s + eos->pressure_potential(s)) < 1e-12);
    }
  }
}

TEST_CASE("white dwarf parametric law") {
  const double g1 = 1.3;
  const double g2 = 0.8;
  const auto eos = std::make_shared<WhiteDwarf>(WhiteDwarfParams{g1, g2});
  for (double x : {1e-3, 0.05, 0.3, 1.0, 7.0, 200.0}) {
    const double s = g2 * x * x * x;
    CHECK(eos->fermi_parameter(s) == doctest::Approx(x).epsilon(1e-14));
    const double direct = g1 * (x * (2 * x * x - 3) * std::sqrt(1 + x * x) + 3 * std::asinh(x));
    if (x >= 0.3) CHECK(rel(eos->pressure(s), direct) < 1e-12);
    // p'(s) = dp/dx / (3 Gamma2 x^2) with dp/dx = 8 Gamma1 x^4 / sqrt(1 + x^2)
    CHECK(rel(eos->dpressure(s), 8 * g1 * x * x / (3 * g2 * std::sqrt(1 + x * x))) < 1e-12);
    CHECK(rel(eos->density_from_enthalpy(eos->enthalpy(s)), s) < 1e-10);
  }
  // Small x: the series avoids the cancellation of the closed form.
  const double x = 1e-4;
  CHECK(rel(eos->pressure(g2 * std::pow(x, 3)), 1.6 * g1 * std::pow(x, 5)) < 1e-6);
  CHECK(eos->kappa_limit() == doctest::Approx(2 * g1 * std::pow(g2, -4.0 / 3.0)));
}

TEST_CASE("white dwarf asymptotic regimes") {
  const auto eos = make_white_dwarf({1.0, 1.0});
  for (double x : {30.0, 100.0, 1e3}) {
    const double s = x * x * x;
    CHECK(std::abs(eos->pressure(s) / std::pow(s, 4.0 / 3.0) / 2.0 - 1.0) < 0.01);
  }
  for (double x : {1e-2, 1e-3, 1e-5}) {
    const double s = x * x * x;
    CHECK(std::abs(eos->pressure(s) / std::pow(s, 5.0 / 3.0) / 1.6 - 1.0) < 0.01);
  }
}

TEST_CASE("stable differences") {
  const std::vector<EosPtr> laws = {make_polytrope({1.0, 2.0}), make_polytrope({1.0, 5.0 / 3.0}),
                                    make_white_dwarf({1.0, 1.0})};
  for (const auto& eos : laws) {
    for (double s : {1e-6, 0.3, 40.0}) {
      CAPTURE(eos->name());
      CAPTURE(s);
      for (double d : {-0.5, -0.1, 0.2, 1.0}) {
        CHECK(rel(eos->pressure_difference(s, d), eos->pressure(s * (1 + d)) - eos->pressure(s)) <
              1e-11);
        CHECK(rel(eos->potential_difference(s, d),
                  eos->pressure_potential(s * (1 + d)) - eos->pressure_potential(s)) < 1e-10);
      }
      // Second-order Taylor oracle for tiny relative changes.
      const double d = 1e-9;
      const double dp = eos->dpressure(s) * s * d + 0.5 * eos->d2pressure(s) * s * s * d * d;
      CHECK(rel(eos->pressure_difference(s, d), dp) < 1e-12);
      const double dA = eos->pressure(s) / s * d;
      CHECK(rel(eos->potential_difference(s, d), dA) < 1e-8);
      CHECK(eos->pressure_difference(s, 0.0) == 0.0);
    }
  }
}

TEST_CASE("domain and parameter errors") {
  CHECK_THROWS_AS((void)make_polytrope({0.0, 2.0}), ParameterError);
  CHECK_THROWS_AS((void)make_polytrope({1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS((void)make_white_dwarf({-1.0, 1.0}), ParameterError);
  const auto eos = make_polytrope({1.0, 2.0});
  CHECK_THROWS_AS((void)eos->pressure(-1.0), DomainError);
  CHECK_THROWS_AS((void)eos->pressure_difference(1.0, -1.0), DomainError);
  CHECK_THROWS_AS((void)verify_structure_conditions(*eos, 0.0, 10), ParameterError);
}

TEST_CASE("structure conditions") {
  const auto wd = make_white_dwarf({1.0, 1.0});
  const StructureReport rep = verify_structure_conditions(*wd, 1e9, 400, 20);
  CHECK(rep.pass);
  CHECK(rep.min_index >= 4.0 / 3.0);
  CHECK(rep.max_index <= 5.0 / 3.0 + 1e-12);
  CHECK(rep.empirical_gamma_bar == doctest::Approx(5.0 / 3.0).epsilon(1e-6));

  const auto soft = make_polytrope({1.0, 1.25});
  CHECK_FALSE(verify_structure_conditions(*soft, 1.0, 50).pass);
  const auto poly = make_polytrope({1.0, 2.0});
  const StructureReport p = verify_structure_conditions(*poly, 10.0, 50);
  CHECK(p.pass);
  CHECK(p.min_index == doctest::Approx(2.0));
}

}  // TEST_SUITE
