#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "vstar/equilibrium.hpp"
#include "vstar/errors.hpp"

using namespace vstar;
using std::numbers::pi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct LaneEmden {
  double xi1 = 0.0;
  double omega = 0.0;  // -xi^2 theta'(xi1)
};

// Independent oracle: theta'' + 2 theta'/xi + theta^n = 0 in (theta, xi) form.
LaneEmden lane_emden(double n) {
  using State = std::array<double, 2>;
  auto rhs = [n](const State& y, State& dy, double xi) {
    dy[0] = y[1];
    dy[1] = -std::pow(std::max(y[0], 0.0), n) - 2.0 * y[1] / xi;
  };
  double xi = 1e-4;
  State y = {1.0 - xi * xi / 6.0 + n * std::pow(xi, 4) / 120.0,
             -xi / 3.0 + n * std::pow(xi, 3) / 30.0};
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  stepper.initialize(y, xi, 1e-3);
  while (stepper.current_state()[0] > 0.0) stepper.do_step(rhs);
  double a = stepper.previous_time();
  double b = stepper.current_time();
  State tmp;
  for (int k = 0; k < 200; ++k) {
    const double m = 0.5 * (a + b);
    stepper.calc_state(m, tmp);
    (tmp[0] > 0.0 ? a : b) = m;
  }
  stepper.calc_state(a, tmp);
  return {a, -a * a * tmp[1]};
}

}  // namespace

TEST_SUITE("equilibrium") {

TEST_CASE("gamma = 2 closed form") {
  ProfileOptions opts;
  opts.n_cells = 4096;
  const auto eos = make_polytrope({1.0, 2.0});
  const EquilibriumProfile p = integrate_profile(eos, 1.0, 1.0, opts);
  const double a = std::sqrt(2.0 * pi);
  CHECK(rel(p.R_bar, std::sqrt(pi / 2.0)) < 1e-9);
  CHECK(rel(p.M, std::sqrt(2.0 * pi)) < 1e-8);
  CHECK(p.R_error < 1e-8);
  double worst_rho = 0.0;
  double worst_phi = 0.0;
  for (std::size_t j = 0; j < p.xs.size(); ++j) {
    const double r = p.xs[j];
    const double rho = r == 0.0 ? 1.0 : std::sin(a * r) / (a * r);
    worst_rho = std::max(worst_rho, std::abs(p.rho_bar[j] - rho));
    if (r > 0.0) {
      const double m = 4.0 * pi / (a * a * a) * (std::sin(a * r) - a * r * std::cos(a * r));
      worst_phi = std::max(worst_phi, std::abs(p.phi[j] - m / (r * r * r)));
    }
  }
  CHECK(worst_rho < 1e-9);
  CHECK(worst_phi < 5e-7);  // largest next to the centre, where m / r^3 is a small ratio
  CHECK(p.phi[0] == doctest::Approx(4.0 * pi / 3.0));
  CHECK(p.i_bar.back() == 0.0);
  CHECK(p.rho_bar.back() == 0.0);
  CHECK(4.0 * pi * p.cumulative.back() == doctest::Approx(p.M).epsilon(1e-10));
  CHECK(equilibrium_residual(p) < 1e-6 * pressure_gradient_scale(p));
}

TEST_CASE("Lane-Emden oracle for other exponents") {
  for (double gamma : {1.5, 5.0 / 3.0, 2.5}) {
    CAPTURE(gamma);
    const double n = 1.0 / (gamma - 1.0);
    const LaneEmden le = lane_emden(n);
    // kappa = G = rho_c = 1: alpha^2 = (n + 1) / (4 pi)
    const double alpha = std::sqrt((n + 1.0) / (4.0 * pi));
    const EquilibriumProfile p = integrate_profile(make_polytrope({1.0, gamma}), 1.0, 1.0);
    CHECK(rel(p.R_bar, le.xi1 * alpha) < 1e-7);
    CHECK(rel(p.M, 4.0 * pi * alpha * alpha * alpha * le.omega) < 1e-7);
  }
}

TEST_CASE("interpolants through the tabulation") {
  const EquilibriumProfile p = integrate_profile(make_polytrope({1.0, 5.0 / 3.0}), 1.0, 1.0);
  for (std::size_t j = 0; j < p.xs.size(); j += 37) {
    CHECK(p.density_at(p.xs[j]) == doctest::Approx(p.rho_bar[j]).epsilon(1e-12));
    CHECK(p.enthalpy_at(p.xs[j]) == doctest::Approx(p.i_bar[j]).epsilon(1e-12));
  }
  CHECK(p.outer_mass_at(p.R_bar) == 0.0);
  CHECK(p.cumulative_mass_at(p.R_bar) == doctest::Approx(p.M / (4.0 * pi)));
  const double r = 0.999 * p.R_bar;
  CHECK(p.cumulative_mass_at(r) + p.outer_mass_at(r) == doctest::Approx(p.M / (4.0 * pi)));
  CHECK(p.density_at(2.0 * p.R_bar) == 0.0);
}

TEST_CASE("mass scaling and the critical mass") {
  const auto poly = make_polytrope({1.0, 2.0});
  for (double rc : {0.1, 1.0, 30.0}) {
    const double m1 = mass_radius(*poly, rc, 1.0, 1e-10).M;
    const double m2 = mass_radius(*poly, 2.0 * rc, 1.0, 1e-10).M;
    CHECK(std::abs(m2 / m1 - 2.0) < 1e-6);
  }
  const auto wd = make_white_dwarf({1.0, 1.0});
  std::vector<double> grid;
  for (int k = 0; k < 25; ++k) grid.push_back(std::pow(10.0, 6.0 * k / 24.0));
  const MassCurve curve = critical_mass_scan(*wd, grid, 1.0, 1e-10, 3);
  REQUIRE(curve.points.size() == grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(curve.points[k].ok);
    CHECK(curve.points[k].rho_c == grid[k]);
    if (k > 0) CHECK(curve.running_max[k] >= curve.running_max[k - 1]);
  }
  CHECK(curve.plateau);
  CHECK(curve.last_decade_increment < 0.05);
  CHECK_THROWS_AS((void)critical_mass_scan(*wd, {1.0, 0.5}, 1.0), ParameterError);
}

TEST_CASE("shooting for a target mass") {
  const auto poly = make_polytrope({1.0, 2.0});
  ShootingConfig sc;
  sc.target_mass = 2.0 * std::sqrt(2.0 * pi);  // rho_c = 2 in closed form
  const EquilibriumProfile p = solve_for_mass(poly, sc, 1.0);
  CHECK(p.rho_c == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(rel(p.M, sc.target_mass) < 1e-9);

  const auto wd = make_white_dwarf({1.0, 1.0});
  ShootingConfig over;
  over.target_mass = 20.0;
  over.rho_c_low = 1.0;
  over.rho_c_high = 1e6;
  CHECK_THROWS_AS((void)solve_for_mass(wd, over, 1.0), ExceedsCriticalMass);
  ShootingConfig low;
  low.target_mass = 1.0;
  low.rho_c_low = 1.0;
  low.rho_c_high = 1e3;
  CHECK_THROWS_AS((void)solve_for_mass(wd, low, 1.0), BracketError);
  ShootingConfig bad;
  CHECK_THROWS_AS((void)solve_for_mass(wd, bad, 1.0), ParameterError);
}

TEST_CASE("unbound and invalid inputs") {
  CHECK_THROWS_AS((void)integrate_profile(make_polytrope({1.0, 1.1}), 1.0, 1.0), UnboundProfile);
  CHECK_THROWS_AS((void)integrate_profile(make_polytrope({1.0, 2.0}), -1.0, 1.0), ParameterError);
  CHECK_THROWS_AS((void)integrate_profile(make_polytrope({1.0, 2.0}), 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS((void)integrate_profile(nullptr, 1.0, 1.0), ParameterError);
}

TEST_CASE("enthalpy is equivalent to distance from the surface") {
  std::vector<EquilibriumProfile> profiles;
  for (double g : {1.5, 2.0, 2.5}) profiles.push_back(integrate_profile(make_polytrope({1.0, g}), 1.0, 1.0));
  for (double rc : {1.0, 100.0}) profiles.push_back(integrate_profile(make_white_dwarf({1.0, 1.0}), rc, 1.0));
  for (const auto& p : profiles) {
    CAPTURE(p.eos->name());
    const EnthalpyDistanceCheck c = enthalpy_distance_check(p);
    CHECK(c.pass);
    CHECK(c.K8 == doctest::Approx(p.M / (2.0 * p.R_bar * p.R_bar)));
    CHECK(c.K9 == doctest::Approx(4.0 * pi * p.rho_c * p.R_bar / 3.0));
  }
}

TEST_CASE("tabulated density") {
  const auto eos = make_polytrope({1.0, 2.0});
  const double R = 2.0;
  auto rho = [R](double r) { return 1.0 - (r / R) * (r / R); };
  const EquilibriumProfile p = tabulate_profile(eos, 1.0, R, rho, 64);
  // int_0^R r^2 (1 - r^2/R^2) dr = 2 R^3 / 15
  CHECK(p.cumulative.back() == doctest::Approx(2.0 * R * R * R / 15.0).epsilon(1e-13));
  CHECK(p.M == doctest::Approx(4.0 * pi * 2.0 * R * R * R / 15.0).epsilon(1e-13));
  CHECK(p.i_bar[10] == doctest::Approx(eos->enthalpy(rho(p.xs[10]))));
}

}  // TEST_SUITE
