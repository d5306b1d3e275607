#include "vstar/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "vstar/errors.hpp"

namespace vstar {

void validate(const SimConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ParameterError(fmt::format("sim.{} must be > 0, got {}", name, v));
  };
  if (c.n_cells < 2) throw ParameterError("sim.n_cells must be >= 2");
  if (!(c.grading_q >= 1.0)) throw ParameterError("sim.grading_q must be >= 1");
  positive(c.dt_init, "dt_init");
  positive(c.dt_max, "dt_max");
  positive(c.snapshot_every, "snapshot_every");
  positive(c.sample_every, "sample_every");
  positive(c.newton_tol, "newton_tol");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ParameterError("sim.cfl must lie in (0, 1]");
  if (!(c.t_final >= 0.0)) throw ParameterError("sim.t_final must be >= 0");
  if (c.newton_max == 0) throw ParameterError("sim.newton_max must be >= 1");
  if (!(c.nu1 >= 0.0) || !(c.nu2 > 0.0)) {
    throw ParameterError("viscosities need nu1 >= 0 and nu2 > 0");
  }
}

Snapshot make_snapshot(const SimState& s) {
  return {s.t, s.mesh->x, s.r, s.v, density_field(s)};
}

namespace {

// Next multiple of `every` strictly after t (with a little slack against rounding).
double next_event(double t, double every) {
  const double k = std::floor(t / every + 1e-9) + 1.0;
  return k * every;
}

}  // namespace

Trajectory run(const SimState& initial, const SimConfig& cfg, const DiagnosticsConfig& dcfg,
               const TrajectorySink* sink, Trajectory* partial) {
  validate(cfg);
  validate_state(initial);
  Trajectory local;
  Trajectory& traj = partial ? *partial : local;
  traj = Trajectory{};

  auto record_sample = [&](const SimState& s) {
    EnergyReport rep = energy_report(s, dcfg);
    if (!rep.small_regime && !traj.left_small_regime) {
      traj.left_small_regime = true;
      traj.first_exit_time = s.t;
      traj.warnings.push_back(fmt::format("state left the small-perturbation regime at t = {}", s.t));
    }
    if (sink && sink->on_sample) sink->on_sample(rep);
    traj.series.push_back(std::move(rep));
  };
  auto record_snapshot = [&](const SimState& s) {
    Snapshot snap = make_snapshot(s);
    if (sink && sink->on_snapshot) sink->on_snapshot(snap);
    traj.snapshots.push_back(std::move(snap));
  };

  SimState s = initial;
  const double t0 = s.t;
  const double t_end = t0 + cfg.t_final;
  record_sample(s);
  record_snapshot(s);
  if (traj.series.front().frakE > cfg.frakE0_bound) {
    traj.warnings.push_back(fmt::format("initial functional {} exceeds the configured bound {}",
                                        traj.series.front().frakE, cfg.frakE0_bound));
  }

  const StepOptions opts{cfg.newton_tol, cfg.newton_max};
  double dt = std::min(cfg.dt_init, cfg.dt_max);
  double next_sample = t0 + next_event(0.0, cfg.sample_every);
  double next_snap = t0 + next_event(0.0, cfg.snapshot_every);
  double lyap = discrete_energy(s);
  std::size_t accepted_run = 0;
  std::size_t consecutive_rejects = 0;

  while (s.t < t_end) {
    const double target = std::min({next_sample, next_snap, t_end});
    double h = std::min({dt, cfg.dt_max, cfl_time_step(s, cfg.cfl)});
    bool clamped = false;
    if (s.t + h >= target * (1.0 - 1e-14) || target - (s.t + h) < 1e-6 * h) {
      h = target - s.t;
      clamped = true;
    }
    StepInfo info;
    SimState next;
    try {
      next = step(s, h, opts, &info);
    } catch (const StepRejected& e) {
      ++traj.rejections;
      if (++consecutive_rejects > cfg.max_rejections) {
        traj.final_state = s;
        throw StepFailure(fmt::format("step failed at t = {} after {} rejections: {}", s.t,
                                      cfg.max_rejections, e.what()),
                          s.t);
      }
      dt = 0.5 * h;
      accepted_run = 0;
      continue;
    }
    consecutive_rejects = 0;
    if (clamped) next.t = target;
    s = std::move(next);
    ++traj.steps;
    traj.newton_iterations += info.newton_iterations;

    const double l_new = discrete_energy(s);
    if (l_new > lyap && lyap != 0.0) {
      traj.max_lyapunov_rise = std::max(traj.max_lyapunov_rise, (l_new - lyap) / std::abs(lyap));
    }
    lyap = l_new;

    if (!clamped && ++accepted_run >= 5) {
      dt = std::min(1.2 * dt, cfg.dt_max);
      accepted_run = 0;
    }
    const bool at_end = s.t >= t_end;
    if (s.t >= next_sample || at_end) {
      record_sample(s);
      next_sample = t0 + next_event(s.t - t0, cfg.sample_every);
    }
    if (s.t >= next_snap || at_end) {
      record_snapshot(s);
      next_snap = t0 + next_event(s.t - t0, cfg.snapshot_every);
    }
  }
  traj.final_state = s;
  return partial ? *partial : local;
}

Trajectory run(std::shared_ptr<const EquilibriumProfile> profile, Perturbation& perturbation,
               const SimConfig& cfg, const DiagnosticsConfig& dcfg, const TrajectorySink* sink,
               Trajectory* partial) {
  validate(cfg);
  if (!profile) throw ParameterError("run: null profile");
  const bool same_grid =
      profile->n_cells() == cfg.n_cells && profile->grading_q == cfg.grading_q;
  auto mesh = same_grid ? make_mesh(profile) : make_mesh(profile, cfg.n_cells, cfg.grading_q);
  const SimState initial = make_compatible_perturbation(mesh, perturbation, cfg.nu1, cfg.nu2);
  return run(initial, cfg, dcfg, sink, partial);
}

}  // namespace vstar
