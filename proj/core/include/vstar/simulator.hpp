/**
 * @file simulator.hpp
 * @brief Lagrangian free-boundary Navier-Stokes-Poisson dynamics around an equilibrium.
 *
 * Positions r and velocities v live at the nodes x_0 = 0 < ... < x_N = R of the Lagrangian
 * grid; densities live in the cells and follow from the (fixed) cell masses and the current
 * cell volumes. Spatial factors of 4 pi are dropped throughout: a "mass" below is
 * int x^2 rho dx.
 *
 * The discrete forces are the exact gradients of a discrete energy
 *
 *   U(r) = sum_c mu_c A(mu_c / V_c(r)) - sum_j x_j^4 P_j / r_j,   P_j = pbar_{j-1/2} - pbar_{j+1/2}
 *
 * plus a viscous force derived from a cell-wise dissipation function. The gravity term is
 * calibrated by the discrete equilibrium weights P_j, so (r = x, v = 0) is an exact root of
 * the momentum residual. The free-surface stress condition is the natural boundary condition
 * of this variational form.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vstar/equilibrium.hpp"

namespace vstar {

/// Cell and node data of a Lagrangian grid over an equilibrium profile.
struct LagrangianMesh {
  std::shared_ptr<const EquilibriumProfile> profile;
  EosPtr eos;
  double R_bar = 0.0;
  std::vector<double> x;          ///< nodes
  std::vector<double> rho_bar;    ///< equilibrium density at nodes
  std::vector<double> i_bar;      ///< equilibrium enthalpy at nodes
  std::vector<double> p_bar;      ///< equilibrium pressure at nodes
  std::vector<double> cell_mass;  ///< mu_c = int_cell x^2 rho_bar dx
  std::vector<double> cell_volume;   ///< (x_b^3 - x_a^3) / 3
  std::vector<double> cell_rho_bar;  ///< mu_c / Vbar_c
  std::vector<double> cell_p_bar;    ///< p(cell_rho_bar)
  std::vector<double> node_mass;     ///< lumped: half of each adjacent cell

  [[nodiscard]] std::size_t n_cells() const noexcept { return cell_mass.size(); }
};

/// Builds the mesh on the profile's own nodes.
[[nodiscard]] std::shared_ptr<const LagrangianMesh> make_mesh(
    std::shared_ptr<const EquilibriumProfile> profile);
/// Builds the mesh on a new graded grid; cell masses come from the profile's cumulative mass.
[[nodiscard]] std::shared_ptr<const LagrangianMesh> make_mesh(
    std::shared_ptr<const EquilibriumProfile> profile, std::size_t n_cells, double grading_q);

struct SimState {
  std::shared_ptr<const LagrangianMesh> mesh;
  std::vector<double> r;
  std::vector<double> v;
  double t = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;

  [[nodiscard]] const std::vector<double>& xs() const { return mesh->x; }
  [[nodiscard]] double nu() const noexcept { return 4.0 * nu1 / 3.0 + nu2; }
  [[nodiscard]] double outer_radius() const { return r.back(); }
};

/// r = x, v = 0 at time 0.
[[nodiscard]] SimState equilibrium_state(std::shared_ptr<const LagrangianMesh> mesh, double nu1,
                                         double nu2);

/// Throws InvalidState unless r(0) = 0, v(0) = 0 and r is strictly increasing.
void validate_state(const SimState& state);

/// Nodal acceleration F_j / m_j; zero at x = 0. Throws InvalidState for a folded grid.
[[nodiscard]] std::vector<double> momentum_rhs(const SimState& state);

/// Cell densities mu_c / V_c.
[[nodiscard]] std::vector<double> cell_density(const SimState& state);
/// Nodal density x^2 rho_bar / (r^2 r_x) (limit rho_bar(0) / r_x(0)^3 at x = 0).
[[nodiscard]] std::vector<double> density_field(const SimState& state);
/// 4 pi sum_c rho_c V_c.
[[nodiscard]] double total_mass(const SimState& state);

/// Stress operator (4/3) nu1 (v_x/r_x - v/r) + nu2 (v_x/r_x + 2 v/r) at x = R with
/// one-sided second-order differences.
[[nodiscard]] double boundary_stress(const SimState& state);

/// Discrete energy: kinetic + internal + gravitational, relative to equilibrium. Its
/// decrease over a backward-Euler step equals dt times the discrete dissipation plus
/// nonnegative numerical damping near a stable equilibrium.
[[nodiscard]] double discrete_energy(const SimState& state);

struct StepOptions {
  double newton_tol = 1e-12;
  std::size_t newton_max = 25;
};

struct StepInfo {
  std::size_t newton_iterations = 0;
  double update_norm = 0.0;
};

/// One backward-Euler step of size dt (Newton on v with r = r^n + dt v).
/// Throws StepRejected on non-convergence, a non-finite iterate or a folded cell.
[[nodiscard]] SimState step(const SimState& state, double dt, const StepOptions& opts = {},
                            StepInfo* info = nullptr);

/// Largest dt allowed by the sound-speed condition cfl * min_c dx_c / c_c.
[[nodiscard]] double cfl_time_step(const SimState& state, double cfl);

/// A positive density on [0, R0) vanishing at R0. `cumulative` (int_0^s y^2 rho dy) and
/// `outer` (int_s^R0 y^2 rho dy) are optional; missing ones come from composite
/// Gauss-Legendre quadrature on a refinement of the mesh.
/// The outer mass is used near the surface, where the cumulative mass is flat.
struct InitialDensity {
  std::function<double(double)> rho;
  double R0 = 0.0;
  std::function<double(double)> cumulative;
  std::function<double(double)> outer;
};

/// r0 at the mesh nodes from equal cumulative masses. Throws AdmissibilityError if the total
/// masses differ by more than `mass_rtol`.
[[nodiscard]] std::vector<double> initial_map(const InitialDensity& rho0, const LagrangianMesh& mesh,
                                              double mass_rtol = 1e-6);

enum class PerturbationKind { velocity_bump, map_dilation };

struct Perturbation {
  PerturbationKind kind = PerturbationKind::velocity_bump;
  double epsilon = 0.0;
  double shape_exponent = 2.0;  ///< k in v0 = eps x (1 - a (x/R)^k)
  double bump_coefficient = 0.0;  ///< the solved a (velocity_bump only)
};

[[nodiscard]] PerturbationKind parse_perturbation_kind(const std::string& name);
[[nodiscard]] std::string to_string(PerturbationKind kind);

/// velocity_bump: r0 = x, v0 = eps x (1 - a (x/R)^k) with a chosen so the discrete
/// boundary stress vanishes. map_dilation: r0 from the mass-preserving dilation
/// rho0(s) = rho_bar(s / lambda) / lambda^3, lambda = 1 + eps, and v0 = 0.
[[nodiscard]] SimState make_compatible_perturbation(std::shared_ptr<const LagrangianMesh> mesh,
                                                    Perturbation& perturbation, double nu1,
                                                    double nu2);

}  // namespace vstar
