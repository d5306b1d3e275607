/**
 * @file diagnostics.hpp
 * @brief Energy functionals, weighted norms, sup-norm panel and decay-rate fits for a
 * Lagrangian state.
 *
 * Nodal derivatives use second-order three-point differences on the graded grid; r - x, v and
 * v_t are continued oddly across x = 0. Integrals are trapezoid sums over the nodes, except
 * the i(rho_bar)^{-alpha}-weighted ones, which integrate the singular weight exactly against
 * piecewise-linear data (product integration), so the vacuum endpoint needs no special care.
 */
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vstar/simulator.hpp"

namespace vstar {

struct LowerEnergies {
  double E0 = 0.0;  ///< int (r-x)^2 + x^2 (r_x-1)^2
  double E1 = 0.0;  ///< int x^2 rho_bar v^2
  double E2 = 0.0;  ///< int x^2 rho_bar v_t^2
  double D0 = 0.0;  ///< int p(rho_bar) [(r-x)^2 + x^2 (r_x-1)^2]
  double D1 = 0.0;  ///< int v^2 + x^2 v_x^2
  double D2 = 0.0;  ///< int v_t^2 + x^2 v_tx^2
};

struct WeightedEnergies {
  double scrE0 = 0.0;  ///< int i^{-alpha} [(r-x)^2 + x^2 (r_x-1)^2]
  double scrD0 = 0.0;  ///< int i^{-alpha} p(rho_bar) [(r-x)^2 + x^2 (r_x-1)^2]
  double scrD1 = 0.0;  ///< int i^{-alpha} (v^2 + x^2 v_x^2)
};

struct EtaFunctionals {
  double eta = 0.0;        ///< int x^2 eta
  double eta0 = 0.0;       ///< int x^2 eta_0
  double lyapunov = 0.0;   ///< discrete energy conserved/dissipated by the scheme
};

using NamedValues = std::vector<std::pair<std::string, double>>;

/// Column names of the sup-norm panel, in output order.
[[nodiscard]] const std::vector<std::string>& sup_norm_names();

struct DiagnosticsConfig {
  double theta = 0.1;
  double l_fraction = 0.25;  ///< l = l_fraction * R for the interior norms
  double e0_bound = 1.0 / 8.0;  ///< a priori bound on |r_x - 1|, |r/x - 1|
};

struct EnergyReport {
  double t = 0.0;
  double frakE = 0.0;
  LowerEnergies lower;
  WeightedEnergies weighted;
  EtaFunctionals eta;
  NamedValues sup_norms;
  double boundary_stress = 0.0;
  bool small_regime = true;  ///< both a priori smallness bounds hold
};

/// 𝔈 = max(|r_x-1|^2, |v_x|^2) + int rho_bar v_t^2 + int p(rho_bar)^2/rho_bar ((r/x)_x^2 + r_xx^2).
[[nodiscard]] double frak_E(const SimState& state, const std::vector<double>& v_t);

[[nodiscard]] LowerEnergies lower_energies(const SimState& state, const std::vector<double>& v_t);

/// Throws ParameterError unless 0 < theta <= 1 - 5 / (4 gamma_bar).
[[nodiscard]] WeightedEnergies weighted_energies(const SimState& state, double theta);

[[nodiscard]] EtaFunctionals eta_functionals(const SimState& state);

/// Pointwise eta and eta_0 at the nodes (exposed for tests).
[[nodiscard]] std::vector<double> eta_density(const SimState& state);
[[nodiscard]] std::vector<double> eta0_density(const SimState& state);

/// Values in the order of sup_norm_names(); l is the excluded boundary layer width.
[[nodiscard]] NamedValues sup_norm_panel(const SimState& state, double l);

/// Full report; v_t comes from momentum_rhs.
[[nodiscard]] EnergyReport energy_report(const SimState& state, const DiagnosticsConfig& cfg);

/// ∫_a^b i^{-alpha} f dx with i and f linear on [a, b] (i >= 0, not both ends zero).
[[nodiscard]] double weighted_cell_integral(double h, double ia, double ib, double fa, double fb,
                                           double alpha);

struct TheoremRates {
  double gamma_bar = 0.0;
  double theta = 0.0;
  double zeta = 0.0;
  int upsilon = 0;
  NamedValues rates;  ///< named exponents; side-condition entries omitted when inactive

  [[nodiscard]] std::optional<double> rate(const std::string& name) const;
};

/// Exponents of the decay estimates. Throws ParameterError for gamma_bar <= 4/3 or theta
/// outside (0, 1 - 5/(4 gamma_bar)].
[[nodiscard]] TheoremRates theorem_rates(double gamma_bar, double theta);

struct DecayFit {
  std::string quantity;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t samples = 0;
  double fitted_exponent = 0.0;  ///< slope of log(value) against log(1+t)
  double prefactor = 0.0;        ///< exp(intercept)
  double r_squared = 0.0;
  double predicted_exponent = 0.0;
  double slack = 0.15;
  bool pass = false;  ///< fitted <= -predicted + slack
  bool vacuous = false;  ///< quantity identically zero on the window (unperturbed run)
  std::string note;      ///< why a fit could not be made, if it could not
};

/// Least-squares power-law fit on t in [t_lo, t_hi]. Throws ParameterError for t_lo < 1 and
/// FitError for fewer than 10 samples or a nonpositive value.
[[nodiscard]] DecayFit fit_decay(const std::string& quantity, const std::vector<double>& t,
                                 const std::vector<double>& value, double t_lo, double t_hi,
                                 double predicted, double slack = 0.15);

/// A series quantity and the decay exponent predicted for it. Quantities are "D1" or a panel
/// name with suffix "_sq" (the squared sup norm).
struct FitTarget {
  std::string quantity;
  double predicted = 0.0;
};

/// The squared quantities bounded by the decay estimates, with their exponents.
[[nodiscard]] std::vector<FitTarget> fit_targets(const TheoremRates& rates);

/// Values of a fit quantity along a series. Throws ParameterError for an unknown name.
[[nodiscard]] std::vector<double> series_values(const std::vector<EnergyReport>& series,
                                                const std::string& quantity);

/// Fits every target on [t_lo, t_hi]. Targets without samples in the window are skipped; an
/// all-zero window passes vacuously; other fit errors are recorded in `note` as failures.
[[nodiscard]] std::vector<DecayFit> fit_all(const std::vector<EnergyReport>& series,
                                            const std::vector<FitTarget>& targets, double t_lo,
                                            double t_hi, double slack = 0.15);

}  // namespace vstar
