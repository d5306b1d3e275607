/**
 * @file eos.hpp
 * @brief Barotropic pressure laws p(rho) and the thermodynamic quantities derived from them.
 *
 * Two laws are provided: the polytrope p = kappa rho^gamma and the zero-temperature
 * degenerate electron gas of a white dwarf, given parametrically by
 *
 *   p(x) = Gamma1 (x (2x^2 - 3) sqrt(x^2 + 1) + 3 asinh x),   rho(x) = Gamma2 x^3.
 *
 * Derived quantities:
 *   enthalpy            i(s) = int_0^s p'(t)/t dt
 *   pressure potential  A(s) = int_0^s p(t)/t^2 dt      (i = p/s + A)
 *   gamma_bar           lim_{s->0+} s p'(s)/p(s)
 *   kappa_limit         lim_{s->inf} s^{-4/3} p(s)      (+inf for gamma > 4/3 polytropes)
 *
 * All public evaluators validate their density argument and throw DomainError for s < 0.
 * Instances are immutable and safe to share between threads.
 */
#pragma once

#include <memory>
#include <string>
#include <vector>

namespace vstar {

struct PolytropeParams {
  double kappa = 1.0;
  double gamma = 2.0;
};

struct WhiteDwarfParams {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
};

class EquationOfState {
 public:
  virtual ~EquationOfState() = default;

  [[nodiscard]] double pressure(double s) const;
  [[nodiscard]] double dpressure(double s) const;
  [[nodiscard]] double d2pressure(double s) const;
  [[nodiscard]] double enthalpy(double s) const;
  [[nodiscard]] double pressure_potential(double s) const;

  /// Inverse of the (strictly increasing) enthalpy; returns 0 for i <= 0.
  [[nodiscard]] double density_from_enthalpy(double i) const;

  /// p(s(1+delta)) - p(s) without cancellation for small |delta|. Requires delta > -1.
  [[nodiscard]] double pressure_difference(double s, double delta) const;
  /// A(s(1+delta)) - A(s) without cancellation for small |delta|. Requires delta > -1.
  [[nodiscard]] double potential_difference(double s, double delta) const;

  [[nodiscard]] virtual double gamma_bar() const = 0;
  [[nodiscard]] virtual double kappa_limit() const = 0;
  [[nodiscard]] virtual std::string name() const = 0;

 protected:
  virtual double do_pressure(double s) const = 0;
  virtual double do_dpressure(double s) const = 0;
  virtual double do_d2pressure(double s) const = 0;
  virtual double do_enthalpy(double s) const = 0;
  virtual double do_pressure_potential(double s) const = 0;
  virtual double do_density_from_enthalpy(double i) const = 0;
  virtual double do_pressure_difference(double s, double delta) const;
  virtual double do_potential_difference(double s, double delta) const;
};

class Polytrope final : public EquationOfState {
 public:
  explicit Polytrope(PolytropeParams params);

  [[nodiscard]] const PolytropeParams& params() const noexcept { return params_; }
  [[nodiscard]] double gamma_bar() const override { return params_.gamma; }
  [[nodiscard]] double kappa_limit() const override;
  [[nodiscard]] std::string name() const override { return "polytrope"; }

 protected:
  double do_pressure(double s) const override;
  double do_dpressure(double s) const override;
  double do_d2pressure(double s) const override;
  double do_enthalpy(double s) const override;
  double do_pressure_potential(double s) const override;
  double do_density_from_enthalpy(double i) const override;
  double do_pressure_difference(double s, double delta) const override;
  double do_potential_difference(double s, double delta) const override;

 private:
  PolytropeParams params_;
};

class WhiteDwarf final : public EquationOfState {
 public:
  explicit WhiteDwarf(WhiteDwarfParams params);

  [[nodiscard]] const WhiteDwarfParams& params() const noexcept { return params_; }
  [[nodiscard]] double gamma_bar() const override { return 5.0 / 3.0; }
  [[nodiscard]] double kappa_limit() const override;
  [[nodiscard]] std::string name() const override { return "white_dwarf"; }

  /// Fermi-momentum parameter x = (s / Gamma2)^{1/3}.
  [[nodiscard]] double fermi_parameter(double s) const;
  /// p as a function of the Fermi parameter x >= 0.
  [[nodiscard]] double pressure_of_x(double x) const;

 protected:
  double do_pressure(double s) const override;
  double do_dpressure(double s) const override;
  double do_d2pressure(double s) const override;
  double do_enthalpy(double s) const override;
  double do_pressure_potential(double s) const override;
  double do_density_from_enthalpy(double i) const override;

 private:
  WhiteDwarfParams params_;
};

using EosPtr = std::shared_ptr<const EquationOfState>;

[[nodiscard]] EosPtr make_polytrope(PolytropeParams params);
[[nodiscard]] EosPtr make_white_dwarf(WhiteDwarfParams params);

/// Enthalpy by tanh-sinh quadrature, split at s/2, with the substitution
/// t = sigma^{1/(gamma_bar-1)} on [0, s/2] to remove the integrable endpoint singularity.
/// Throws NumericalError (carrying the error estimate) if the tolerance is not met.
[[nodiscard]] double enthalpy_by_quadrature(const EquationOfState& eos, double s,
                                            double rel_tol = 1e-12);
/// Same scheme for A(s) = int_0^s p(t)/t^2 dt.
[[nodiscard]] double pressure_potential_by_quadrature(const EquationOfState& eos, double s,
                                                      double rel_tol = 1e-12);

struct StructureReport {
  double s_max = 0.0;
  std::vector<double> s;           ///< log-spaced sample densities in (0, s_max]
  std::vector<double> index;       ///< s p'(s) / p(s)
  std::vector<double> curvature;   ///< s p''(s) / p'(s)
  double min_index = 0.0;
  double max_index = 0.0;
  double min_curvature = 0.0;
  double max_curvature = 0.0;
  double empirical_gamma_bar = 0.0;  ///< index at the smallest sample
  bool pass = false;                 ///< min_index >= 4/3 and p, p' > 0 everywhere sampled
};

/// Samples the structure conditions on a log grid spanning `decades` decades below s_max.
[[nodiscard]] StructureReport verify_structure_conditions(const EquationOfState& eos,
                                                          double s_max, std::size_t n_samples,
                                                          double decades = 12.0);

}  // namespace vstar
