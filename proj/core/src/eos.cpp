#include "vstar/eos.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vstar/errors.hpp"

namespace vstar {

namespace {

void check_density(double s, const char* what) {
  if (!(s >= 0.0)) {
    throw DomainError(std::string(what) + ": density must be non-negative, got " +
                      std::to_string(s));
  }
}

void check_delta(double delta) {
  if (!(delta > -1.0)) {
    throw DomainError("relative density change must exceed -1, got " + std::to_string(delta));
  }
}

// Below this Fermi parameter the closed-form white-dwarf pressure loses ~3 digits or more
// to cancellation; the binomial series converges like (0.09)^k there.
constexpr double kSeriesCutoff = 0.3;

// Relative step beyond which stable differences fall back to plain subtraction.
constexpr double kDirectDifference = 0.25;

}  // namespace

// ---------------------------------------------------------------------------------------
// EquationOfState: validation shell

double EquationOfState::pressure(double s) const {
  check_density(s, "pressure");
  return s == 0.0 ? 0.0 : do_pressure(s);
}

double EquationOfState::dpressure(double s) const {
  check_density(s, "dpressure");
  return do_dpressure(s);
}

double EquationOfState::d2pressure(double s) const {
  check_density(s, "d2pressure");
  return do_d2pressure(s);
}

double EquationOfState::enthalpy(double s) const {
  check_density(s, "enthalpy");
  return s == 0.0 ? 0.0 : do_enthalpy(s);
}

double EquationOfState::pressure_potential(double s) const {
  check_density(s, "pressure_potential");
  return s == 0.0 ? 0.0 : do_pressure_potential(s);
}

double EquationOfState::density_from_enthalpy(double i) const {
  if (std::isnan(i)) throw DomainError("density_from_enthalpy: NaN enthalpy");
  return i <= 0.0 ? 0.0 : do_density_from_enthalpy(i);
}

double EquationOfState::pressure_difference(double s, double delta) const {
  check_density(s, "pressure_difference");
  check_delta(delta);
  if (s == 0.0 || delta == 0.0) return 0.0;
  return do_pressure_difference(s, delta);
}

double EquationOfState::potential_difference(double s, double delta) const {
  check_density(s, "potential_difference");
  check_delta(delta);
  if (s == 0.0 || delta == 0.0) return 0.0;
  return do_potential_difference(s, delta);
}

double EquationOfState::do_pressure_difference(double s, double delta) const {
  if (std::abs(delta) > kDirectDifference) {
    return do_pressure(s * (1.0 + delta)) - do_pressure(s);
  }
  // p(s(1+d)) - p(s) = s d int_0^1 p'(s(1 + d t)) dt
  auto f = [&](double t) { return do_dpressure(s * (1.0 + delta * t)); };
  return s * delta * boost::math::quadrature::gauss<double, 10>::integrate(f, 0.0, 1.0);
}

double EquationOfState::do_potential_difference(double s, double delta) const {
  if (std::abs(delta) > kDirectDifference) {
    return do_pressure_potential(s * (1.0 + delta)) - do_pressure_potential(s);
  }
  auto f = [&](double t) {
    const double tau = s * (1.0 + delta * t);
    return do_pressure(tau) / (tau * tau);
  };
  return s * delta * boost::math::quadrature::gauss<double, 10>::integrate(f, 0.0, 1.0);
}

// ---------------------------------------------------------------------------------------
// Polytrope

Polytrope::Polytrope(PolytropeParams params) : params_(params) {
  if (!(params_.kappa > 0.0)) throw ParameterError("polytrope: kappa must be positive");
  if (!(params_.gamma > 1.0)) throw ParameterError("polytrope: gamma must exceed 1");
}

double Polytrope::kappa_limit() const {
  constexpr double four_thirds = 4.0 / 3.0;
  if (params_.gamma > four_thirds) return std::numeric_limits<double>::infinity();
  if (params_.gamma == four_thirds) return params_.kappa;
  return 0.0;
}

double Polytrope::do_pressure(double s) const { return params_.kappa * std::pow(s, params_.gamma); }

double Polytrope::do_dpressure(double s) const {
  return params_.kappa * params_.gamma * std::pow(s, params_.gamma - 1.0);
}

double Polytrope::do_d2pressure(double s) const {
  const double g = params_.gamma;
  return params_.kappa * g * (g - 1.0) * std::pow(s, g - 2.0);
}

double Polytrope::do_enthalpy(double s) const {
  const double g = params_.gamma;
  return params_.kappa * g / (g - 1.0) * std::pow(s, g - 1.0);
}

double Polytrope::do_pressure_potential(double s) const {
  const double g = params_.gamma;
  return params_.kappa / (g - 1.0) * std::pow(s, g - 1.0);
}

double Polytrope::do_density_from_enthalpy(double i) const {
  const double g = params_.gamma;
  return std::pow((g - 1.0) * i / (params_.kappa * g), 1.0 / (g - 1.0));
}

double Polytrope::do_pressure_difference(double s, double delta) const {
  const double g = params_.gamma;
  return params_.kappa * std::pow(s, g) * std::expm1(g * std::log1p(delta));
}

double Polytrope::do_potential_difference(double s, double delta) const {
  const double g = params_.gamma;
  return params_.kappa / (g - 1.0) * std::pow(s, g - 1.0) *
         std::expm1((g - 1.0) * std::log1p(delta));
}

// ---------------------------------------------------------------------------------------
// White dwarf

WhiteDwarf::WhiteDwarf(WhiteDwarfParams params) : params_(params) {
  if (!(params_.gamma1 > 0.0)) throw ParameterError("white dwarf: gamma1 must be positive");
  if (!(params_.gamma2 > 0.0)) throw ParameterError("white dwarf: gamma2 must be positive");
}

double WhiteDwarf::kappa_limit() const {
  return 2.0 * params_.gamma1 * std::pow(params_.gamma2, -4.0 / 3.0);
}

double WhiteDwarf::fermi_parameter(double s) const {
  check_density(s, "fermi_parameter");
  return std::cbrt(s / params_.gamma2);
}

double WhiteDwarf::pressure_of_x(double x) const {
  if (!(x >= 0.0)) throw DomainError("white dwarf: Fermi parameter must be non-negative");
  if (x < kSeriesCutoff) {
    // dp/dx = 8 Gamma1 x^4 (1+x^2)^{-1/2}, integrated term by term.
    const double x2 = x * x;
    double coeff = 1.0;  // binomial(-1/2, k)
    double power = x2 * x2 * x;
    double sum = 0.0;
    for (int k = 0; k < 40; ++k) {
      const double term = coeff * power / (2.0 * k + 5.0);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      coeff *= -(2.0 * k + 1.0) / (2.0 * k + 2.0);
      power *= x2;
    }
    return 8.0 * params_.gamma1 * sum;
  }
  return params_.gamma1 *
         (x * (2.0 * x * x - 3.0) * std::sqrt(x * x + 1.0) + 3.0 * std::asinh(x));
}

double WhiteDwarf::do_pressure(double s) const { return pressure_of_x(std::cbrt(s / params_.gamma2)); }

double WhiteDwarf::do_dpressure(double s) const {
  const double x = std::cbrt(s / params_.gamma2);
  return 8.0 * params_.gamma1 / (3.0 * params_.gamma2) * x * x / std::sqrt(1.0 + x * x);
}

double WhiteDwarf::do_d2pressure(double s) const {
  const double x = std::cbrt(s / params_.gamma2);
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  const double g2 = params_.gamma2;
  return 8.0 * params_.gamma1 * (2.0 + x * x) /
         (9.0 * g2 * g2 * x * std::pow(1.0 + x * x, 1.5));
}

double WhiteDwarf::do_enthalpy(double s) const {
  const double x = std::cbrt(s / params_.gamma2);
  const double x2 = x * x;
  // sqrt(1+x^2) - 1 written without cancellation
  return 8.0 * params_.gamma1 / params_.gamma2 * x2 / (std::sqrt(1.0 + x2) + 1.0);
}

double WhiteDwarf::do_pressure_potential(double s) const {
  return do_enthalpy(s) - do_pressure(s) / s;
}

double WhiteDwarf::do_density_from_enthalpy(double i) const {
  const double w = i * params_.gamma2 / (8.0 * params_.gamma1);
  const double x2 = w * (2.0 + w);
  return params_.gamma2 * x2 * std::sqrt(x2);
}

EosPtr make_polytrope(PolytropeParams params) { return std::make_shared<Polytrope>(params); }

EosPtr make_white_dwarf(WhiteDwarfParams params) { return std::make_shared<WhiteDwarf>(params); }

// ---------------------------------------------------------------------------------------
// Quadrature oracles

namespace {

template <class Integrand>
double singular_quadrature(const EquationOfState& eos, double s, double rel_tol,
                           Integrand&& integrand, const char* what) {
  check_density(s, what);
  if (s == 0.0) return 0.0;

  // integrand ~ t^{gamma_bar - 2} near 0; t = sigma^k with k = 1/(gamma_bar - 1) makes
  // the transformed integrand bounded.
  const double k = 1.0 / (eos.gamma_bar() - 1.0);
  const double half = 0.5 * s;
  auto near = [&](double sigma) {
    if (sigma <= 0.0) return 0.0;
    const double t = std::pow(sigma, k);
    // the powers inside the integrand underflow below this; the transformed integrand is
    // bounded, so the dropped piece is negligible
    if (t < 1e-100) return 0.0;
    return integrand(t) * k * std::pow(sigma, k - 1.0);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  double err_near = 0.0;
  double err_far = 0.0;
  const double sigma_half = std::pow(half, 1.0 / k);
  const double lower = ts.integrate(near, 0.0, sigma_half, rel_tol, &err_near);
  const double upper = ts.integrate(integrand, half, s, rel_tol, &err_far);
  const double value = lower + upper;
  // boost reports the error of the integral mapped onto [-1, 1]
  const double err_abs = 0.5 * (err_near * sigma_half + err_far * half);
  if (!std::isfinite(value) || err_abs > 10.0 * rel_tol * std::abs(value)) {
    throw NumericalError(std::string(what) + ": quadrature did not converge", err_abs);
  }
  return value;
}

}  // namespace

double enthalpy_by_quadrature(const EquationOfState& eos, double s, double rel_tol) {
  return singular_quadrature(
      eos, s, rel_tol, [&](double t) { return eos.dpressure(t) / t; }, "enthalpy_by_quadrature");
}

double pressure_potential_by_quadrature(const EquationOfState& eos, double s, double rel_tol) {
  return singular_quadrature(
      eos, s, rel_tol, [&](double t) { return eos.pressure(t) / (t * t); },
      "pressure_potential_by_quadrature");
}

// ---------------------------------------------------------------------------------------

StructureReport verify_structure_conditions(const EquationOfState& eos, double s_max,
                                            std::size_t n_samples, double decades) {
  if (!(s_max > 0.0)) throw ParameterError("verify_structure_conditions: s_max must be positive");
  if (n_samples < 2) throw ParameterError("verify_structure_conditions: need at least 2 samples");

  StructureReport report;
  report.s_max = s_max;
  report.s.reserve(n_samples);
  bool positive = true;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(n_samples - 1);
    const double s = s_max * std::pow(10.0, -decades * (1.0 - frac));
    const double p = eos.pressure(s);
    const double dp = eos.dpressure(s);
    positive = positive && p > 0.0 && dp > 0.0;
    report.s.push_back(s);
    report.index.push_back(s * dp / p);
    report.curvature.push_back(s * eos.d2pressure(s) / dp);
  }
  const auto [imin, imax] = std::minmax_element(report.index.begin(), report.index.end());
  const auto [cmin, cmax] = std::minmax_element(report.curvature.begin(), report.curvature.end());
  report.min_index = *imin;
  report.max_index = *imax;
  report.min_curvature = *cmin;
  report.max_curvature = *cmax;
  report.empirical_gamma_bar = report.index.front();
  report.pass = positive && report.min_index >= 4.0 / 3.0 - 1e-12;
  return report;
}

}  // namespace vstar
