/**
 * @file equilibrium.hpp
 * @brief Stationary self-gravitating stars: p(rho)_r = -4 pi G rho r^{-2} int_0^r s^2 rho ds.
 *
 * The profile is obtained by integrating the enthalpy form
 *
 *   di/dr = -G m / r^2,   dm/dr = 4 pi r^2 rho(i),   i(0) = i(rho_c), m(0) = 0,
 *
 * outward until i reaches zero at the vacuum radius R. The result is tabulated on the
 * graded grid x_j = R (1 - (1 - j/N)^q).
 */
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vstar/eos.hpp"
#include "vstar/grid.hpp"

namespace vstar {

struct ProfileOptions {
  double ode_tol = 1e-10;
  std::size_t n_cells = 512;
  double grading_q = 2.0;
};

struct EquilibriumProfile {
  EosPtr eos;
  double G = 1.0;
  double rho_c = 0.0;
  double R_bar = 0.0;
  double M = 0.0;
  double i_c = 0.0;       ///< i(rho_c)
  double R_error = 0.0;   ///< estimate from a second solve at ode_tol / 16
  double M_error = 0.0;
  double grading_q = 2.0;

  std::vector<double> xs;
  std::vector<double> rho_bar;
  std::vector<double> phi;     ///< G m(r) / r^3, with the limit 4 pi G rho_c / 3 at r = 0
  std::vector<double> i_bar;
  std::vector<double> cell_mass;   ///< int over cell of s^2 rho ds (mass / 4 pi)
  std::vector<double> cumulative;  ///< int_0^{x_j} s^2 rho ds at nodes

  [[nodiscard]] std::size_t n_cells() const noexcept { return xs.empty() ? 0 : xs.size() - 1; }

  /// Smooth interpolants through the nodal data (cubic Hermite with exact slopes).
  [[nodiscard]] double enthalpy_at(double r) const;
  [[nodiscard]] double density_at(double r) const;
  [[nodiscard]] double cumulative_mass_at(double r) const;
  /// int_r^R s^2 rho ds, accurate to full relative precision near the surface.
  [[nodiscard]] double outer_mass_at(double r) const;
  [[nodiscard]] double phi_at(double r) const;

  /// Builds the interpolants; called by the constructors below.
  void finalize();

 private:
  HermiteInterpolant i_interp_;
  HermiteInterpolant q_interp_;
  HermiteInterpolant c_interp_;
};

/// Solves the structure equations for the given central density.
/// Throws UnboundProfile if i does not reach zero, NumericalError on integrator failure.
[[nodiscard]] EquilibriumProfile integrate_profile(EosPtr eos, double rho_c, double G,
                                                   const ProfileOptions& opts = {});

struct MassRadius {
  double M = 0.0;
  double R = 0.0;
};

/// Mass and radius only (no tabulation); used by the shooting and scanning drivers.
[[nodiscard]] MassRadius mass_radius(const EquationOfState& eos, double rho_c, double G,
                                     double ode_tol);

/// Tabulates a profile from a known density function on [0, R] (test oracles, fake states).
/// Cell masses use 6-point Gauss-Legendre per cell; i is taken as i(rho(r)).
[[nodiscard]] EquilibriumProfile tabulate_profile(EosPtr eos, double G, double R,
                                                  const std::function<double(double)>& rho,
                                                  std::size_t n_cells, double grading_q = 2.0);

struct ShootingConfig {
  double target_mass = 0.0;
  double rho_c_low = 1e-3;
  double rho_c_high = 1e3;
  double tol_mass = 1e-10;
  double ode_tol = 1e-10;
  std::size_t max_iter = 200;
};

/// Finds rho_c with M(rho_c) = target_mass on the increasing branch inside the bracket.
/// Throws ExceedsCriticalMass if the target is above the largest mass seen on the bracket,
/// BracketError if the bracket does not straddle the target.
[[nodiscard]] EquilibriumProfile solve_for_mass(EosPtr eos, const ShootingConfig& cfg, double G,
                                                const ProfileOptions& opts = {});

struct MassCurvePoint {
  double rho_c = 0.0;
  double M = 0.0;
  double R = 0.0;
  bool ok = false;
  std::string error;
};

struct MassCurve {
  std::vector<MassCurvePoint> points;
  std::vector<double> running_max;  ///< M_c estimate after each point
  double Mc_estimate = 0.0;
  double last_decade_increment = 0.0;  ///< (M_last - M(rho_last/10)) / M_last
  bool rising_at_edge = false;
  bool plateau = false;  ///< last-decade increment below 5%
};

/// Evaluates M(rho_c) over an increasing grid; points may run concurrently, the curve is
/// assembled in grid order. Failed points are recorded and skipped.
[[nodiscard]] MassCurve critical_mass_scan(const EquationOfState& eos,
                                           const std::vector<double>& rho_c_grid, double G,
                                           double ode_tol = 1e-10, std::size_t workers = 1);

/// RMS over interior nodes of p(rho)_r + G rho r^{-2} 4 pi int_0^r s^2 rho ds.
/// p_r uses five-point finite differences on the (non-uniform) nodes.
[[nodiscard]] double equilibrium_residual(const EquilibriumProfile& profile);
/// max over interior nodes of |p(rho)_r| with the same stencil, for scaling the residual.
[[nodiscard]] double pressure_gradient_scale(const EquilibriumProfile& profile);

struct EnthalpyDistanceCheck {
  double K8 = 0.0;
  double K9 = 0.0;
  double worst_lower = 0.0;  ///< max_j (K8 (R - x_j) - i_j); <= tol on pass
  double worst_upper = 0.0;  ///< max_j (i_j - K9 (R - x_j)); <= tol on pass
  bool pass = false;
};

/// Checks K8 (R - x) <= i(rho(x)) <= K9 (R - x) at every node.
[[nodiscard]] EnthalpyDistanceCheck enthalpy_distance_check(const EquilibriumProfile& profile,
                                                            double tol = 1e-9);

}  // namespace vstar
