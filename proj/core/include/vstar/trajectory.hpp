/**
 * @file trajectory.hpp
 * @brief Adaptive time integration of a perturbed star with periodic diagnostics.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vstar/diagnostics.hpp"
#include "vstar/simulator.hpp"

namespace vstar {

struct SimConfig {
  std::size_t n_cells = 512;
  double grading_q = 2.0;
  double dt_init = 1e-3;
  double dt_max = 0.05;
  double cfl = 0.9;  ///< dt <= cfl * min_c dx_c / c_s
  double t_final = 100.0;
  double newton_tol = 1e-12;
  std::size_t newton_max = 25;
  double snapshot_every = 10.0;
  double sample_every = 0.5;
  double nu1 = 0.1;
  double nu2 = 0.1;
  std::size_t max_rejections = 20;  ///< consecutive halvings before a hard failure
  double frakE0_bound = 1.0;        ///< warn when 𝔈(0) exceeds this
};

/// Throws ParameterError for nonpositive controls, cfl outside (0, 1] or t_final < 0.
void validate(const SimConfig& cfg);

struct Snapshot {
  double t = 0.0;
  std::vector<double> x, r, v, rho;
};

struct Trajectory {
  std::vector<EnergyReport> series;
  std::vector<Snapshot> snapshots;
  std::optional<SimState> final_state;
  std::size_t steps = 0;
  std::size_t rejections = 0;
  std::size_t newton_iterations = 0;
  double max_lyapunov_rise = 0.0;  ///< max over steps of (L_{n+1} - L_n) / |L_n|, floored at 0
  bool left_small_regime = false;
  double first_exit_time = 0.0;
  std::vector<std::string> warnings;
};

/// Optional callbacks invoked as samples and snapshots are produced (before any failure).
struct TrajectorySink {
  std::function<void(const EnergyReport&)> on_sample;
  std::function<void(const Snapshot&)> on_snapshot;
};

[[nodiscard]] Snapshot make_snapshot(const SimState& state);

/// Integrates from `initial` to cfg.t_final. Samples at multiples of sample_every, snapshots at
/// multiples of snapshot_every, both also at t = 0 and t_final. Throws StepFailure (with the
/// time) after max_rejections consecutive rejected steps; `partial`, when given, holds what was
/// produced up to that point.
[[nodiscard]] Trajectory run(const SimState& initial, const SimConfig& cfg,
                             const DiagnosticsConfig& dcfg, const TrajectorySink* sink = nullptr,
                             Trajectory* partial = nullptr);

/// Builds the mesh from the profile (n_cells, grading_q), applies the perturbation and runs.
[[nodiscard]] Trajectory run(std::shared_ptr<const EquilibriumProfile> profile,
                             Perturbation& perturbation, const SimConfig& cfg,
                             const DiagnosticsConfig& dcfg, const TrajectorySink* sink = nullptr,
                             Trajectory* partial = nullptr);

}  // namespace vstar
