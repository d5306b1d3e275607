#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <memory>
#include <mutex>

#include <fmt/format.h>
#include <json.hpp>

#include "output.hpp"
#include "vstar/equilibrium.hpp"
#include "vstar/errors.hpp"
#include "vstar/grid.hpp"
#include "vstar/trajectory.hpp"

#ifndef VSTAR_VERSION
#define VSTAR_VERSION "unknown"
#endif

namespace vstar::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

// Diagnostic messages from concurrent sweep points must not interleave.
std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

void warn(const std::string& msg) {
  std::lock_guard lock(log_mutex());
  std::cerr << "warning: " << msg << '\n';
}

json base_manifest(const std::string& command, const RunConfig& cfg) {
  json m;
  m["tool"] = "vstar";
  m["version"] = version();
  m["command"] = command;
  m["config"] = to_json(cfg);
  return m;
}

void finish(json& manifest, const fs::path& out, Clock::time_point start,
            const CommandResult& res) {
  manifest["status"] = res.status;
  manifest["exit_code"] = res.exit_code;
  if (!res.message.empty()) manifest["message"] = res.message;
  manifest["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  write_atomic(out / "manifest.json", manifest.dump(2) + "\n");
}

void prepare_dir(const fs::path& out, const RunConfig& cfg) {
  fs::create_directories(out);
  // Effective configuration, enough to rerun the experiment.
  write_atomic(out / "config.ini", to_ini(cfg));
}

std::shared_ptr<const EquilibriumProfile> build_profile(const RunConfig& cfg, const EosPtr& eos,
                                                        std::size_t n_cells, double grading_q) {
  const auto& eq = cfg.equilibrium;
  ProfileOptions opts;
  opts.ode_tol = eq.ode_tol;
  opts.n_cells = n_cells;
  opts.grading_q = grading_q;
  if (eq.target_mass) {
    ShootingConfig sc;
    sc.target_mass = *eq.target_mass;
    sc.rho_c_low = eq.rho_c_low;
    sc.rho_c_high = eq.rho_c_high;
    sc.tol_mass = eq.tol_mass;
    sc.ode_tol = eq.ode_tol;
    return std::make_shared<const EquilibriumProfile>(solve_for_mass(eos, sc, eq.G, opts));
  }
  return std::make_shared<const EquilibriumProfile>(
      integrate_profile(eos, eq.rho_c.value_or(1.0), eq.G, opts));
}

json profile_json(const EquilibriumProfile& p) {
  return {{"rho_c", p.rho_c},     {"R_bar", p.R_bar},     {"M", p.M},
          {"R_error", p.R_error}, {"M_error", p.M_error}, {"i_c", p.i_c},
          {"n_cells", p.n_cells()}};
}

CommandResult failure(const std::exception& e) {
  return {kExitNumerical, "numerical_failure", e.what()};
}

std::vector<std::string> series_header() {
  std::vector<std::string> h = {"t",  "frakE", "E0",    "E1",    "E2",    "D0",  "D1",
                                "D2", "scrE0", "scrD0", "scrD1", "eta", "lyapunov"};
  for (const auto& n : sup_norm_names()) h.push_back(n);
  h.push_back("eta0");
  h.push_back("boundary_stress");
  return h;
}

std::vector<double> series_row(const EnergyReport& r) {
  std::vector<double> row = {r.t,          r.frakE,      r.lower.E0,         r.lower.E1,
                             r.lower.E2,   r.lower.D0,   r.lower.D1,         r.lower.D2,
                             r.weighted.scrE0, r.weighted.scrD0, r.weighted.scrD1, r.eta.eta,
                             r.eta.lyapunov};
  for (const auto& [name, value] : r.sup_norms) row.push_back(value);
  row.push_back(r.eta.eta0);
  row.push_back(r.boundary_stress);
  return row;
}

void write_snapshot(const fs::path& dir, const Snapshot& s) {
  CsvWriter csv(dir / fmt::format("t_{:.6f}.csv", s.t), {"x", "r", "v", "rho"});
  for (std::size_t j = 0; j < s.x.size(); ++j) csv.row({s.x[j], s.r[j], s.v[j], s.rho[j]});
}

json fit_json(const DecayFit& f) {
  json j = {{"quantity", f.quantity},
            {"window", {f.t_lo, f.t_hi}},
            {"samples", f.samples},
            {"predicted", f.predicted_exponent},
            {"slack", f.slack},
            {"verdict", f.pass ? "pass" : "fail"},
            {"vacuous", f.vacuous}};
  if (!f.vacuous && f.note.empty()) {
    j["fitted"] = f.fitted_exponent;
    j["r_squared"] = f.r_squared;
    j["prefactor"] = f.prefactor;
  }
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

struct SimulateSummary {
  CommandResult result;
  double frakE0 = std::nan("");
  std::vector<DecayFit> fits;
  double failure_time = std::nan("");
};

// Runs one simulation into `out`; configuration must already be validated.
SimulateSummary simulate_into(const RunConfig& cfg, const fs::path& out) {
  const auto start = Clock::now();
  SimulateSummary summary;
  json manifest = base_manifest("simulate", cfg);
  prepare_dir(out, cfg);
  fs::create_directories(out / "snapshots");

  try {
    const EosPtr eos = build_eos(cfg);
    const TheoremRates rates = theorem_rates(eos->gamma_bar(), cfg.diagnostics.theta);
    json derived = {{"gamma_bar", rates.gamma_bar}, {"theta", rates.theta},
                    {"zeta", rates.zeta},           {"upsilon", rates.upsilon}};
    json rate_map = json::object();
    for (const auto& [name, value] : rates.rates) rate_map[name] = value;
    derived["rates"] = rate_map;
    manifest["derived"] = derived;

    const auto profile = build_profile(cfg, eos, cfg.sim.n_cells, cfg.sim.grading_q);
    manifest["derived"]["profile"] = profile_json(*profile);

    CsvWriter series(out / "series.csv", series_header());
    TrajectorySink sink;
    sink.on_sample = [&](const EnergyReport& r) {
      series.row(series_row(r));
      series.flush();
    };
    sink.on_snapshot = [&](const Snapshot& s) { write_snapshot(out / "snapshots", s); };

    Perturbation pert = perturbation(cfg);
    Trajectory traj;
    try {
      (void)run(profile, pert, cfg.sim, diagnostics_config(cfg), &sink, &traj);
    } catch (const StepFailure& e) {
      summary.result = {kExitNumerical, "step_failure", e.what()};
      summary.failure_time = e.time();
      manifest["failure_time"] = e.time();
    }
    if (!traj.series.empty()) {
      summary.frakE0 = traj.series.front().frakE;
      manifest["derived"]["frakE0"] = summary.frakE0;
    }
    manifest["perturbation"] = {{"kind", to_string(pert.kind)},
                                {"epsilon", pert.epsilon},
                                {"bump_coefficient", pert.bump_coefficient}};
    manifest["run"] = {{"steps", traj.steps},
                       {"rejections", traj.rejections},
                       {"newton_iterations", traj.newton_iterations},
                       {"samples", traj.series.size()},
                       {"snapshots", traj.snapshots.size()},
                       {"max_lyapunov_rise", traj.max_lyapunov_rise},
                       {"left_small_regime", traj.left_small_regime}};
    if (traj.left_small_regime) manifest["run"]["first_exit_time"] = traj.first_exit_time;
    manifest["warnings"] = traj.warnings;
    for (const auto& w : traj.warnings) warn(w);

    summary.fits = fit_all(traj.series, fit_targets(rates), cfg.diagnostics.fit_t_lo,
                           cfg.diagnostics.fit_t_hi, cfg.diagnostics.slack);
    json fits = json::array();
    bool all_pass = true;
    for (const auto& f : summary.fits) {
      fits.push_back(fit_json(f));
      all_pass = all_pass && f.pass;
    }
    write_atomic(out / "fits.json", fits.dump(2) + "\n");
    json verdicts = json::object();
    for (const auto& f : summary.fits) verdicts[f.quantity] = f.pass ? "pass" : "fail";
    manifest["verdicts"] = verdicts;
    manifest["all_fits_pass"] = all_pass;
  } catch (const vstar::Error& e) {
    summary.result = failure(e);
  }
  finish(manifest, out, start, summary.result);
  return summary;
}

}  // namespace

std::string version() { return VSTAR_VERSION; }

CommandResult cmd_equilibrium(const RunConfig& cfg, const fs::path& out) {
  validate(cfg, Command::equilibrium);
  const auto start = Clock::now();
  json manifest = base_manifest("equilibrium", cfg);
  prepare_dir(out, cfg);
  CommandResult res;
  try {
    const EosPtr eos = build_eos(cfg);
    const auto profile =
        build_profile(cfg, eos, cfg.equilibrium.n_cells, cfg.equilibrium.grading_q);
    const auto& p = *profile;
    CsvWriter csv(out / "profile.csv", {"r", "rho", "phi", "i", "p"});
    for (std::size_t j = 0; j < p.xs.size(); ++j) {
      csv.row({p.xs[j], p.rho_bar[j], p.phi[j], p.i_bar[j], eos->pressure(p.rho_bar[j])});
    }
    const double residual = equilibrium_residual(p);
    const double scale = pressure_gradient_scale(p);
    const EnthalpyDistanceCheck check = enthalpy_distance_check(p);
    json derived = profile_json(p);
    derived["gamma_bar"] = eos->gamma_bar();
    manifest["derived"] = derived;
    manifest["residual"] = {{"rms", residual},
                            {"pressure_gradient_scale", scale},
                            {"relative", scale > 0.0 ? residual / scale : residual}};
    manifest["enthalpy_distance"] = {{"K8", check.K8},
                                     {"K9", check.K9},
                                     {"worst_lower", check.worst_lower},
                                     {"worst_upper", check.worst_upper},
                                     {"pass", check.pass}};
    if (!check.pass) warn("enthalpy-distance check failed");
  } catch (const vstar::Error& e) {
    res = failure(e);
  }
  finish(manifest, out, start, res);
  return res;
}

CommandResult cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  validate(cfg, Command::simulate);
  return simulate_into(cfg, out).result;
}

CommandResult cmd_check_eos(const RunConfig& cfg, const fs::path& out) {
  validate(cfg, Command::check_eos);
  const auto start = Clock::now();
  json manifest = base_manifest("check-eos", cfg);
  prepare_dir(out, cfg);
  CommandResult res;
  try {
    const EosPtr eos = build_eos(cfg);
    const double s_max = cfg.check.s_max.value_or(cfg.equilibrium.rho_c.value_or(1.0));
    const StructureReport rep =
        verify_structure_conditions(*eos, s_max, cfg.check.n_samples, cfg.check.decades);
    CsvWriter csv(out / "eos_check.csv", {"s", "index", "curvature"});
    for (std::size_t k = 0; k < rep.s.size(); ++k) {
      csv.row({rep.s[k], rep.index[k], rep.curvature[k]});
    }
    manifest["structure"] = {{"s_max", rep.s_max},
                             {"min_index", rep.min_index},
                             {"max_index", rep.max_index},
                             {"min_curvature", rep.min_curvature},
                             {"max_curvature", rep.max_curvature},
                             {"gamma_bar", eos->gamma_bar()},
                             {"empirical_gamma_bar", rep.empirical_gamma_bar},
                             {"pass", rep.pass}};
    if (!rep.pass) {
      res = {kExitNumerical, "structure_conditions_failed",
             fmt::format("minimum index s p'/p = {} is below 4/3", rep.min_index)};
    }
  } catch (const vstar::Error& e) {
    res = failure(e);
  }
  finish(manifest, out, start, res);
  return res;
}

CommandResult cmd_sweep(const RunConfig& cfg, const fs::path& out, const std::string& axis,
                        const std::vector<double>& values, std::size_t workers) {
  if (!is_sweep_axis(axis)) {
    throw ConfigError("unknown sweep axis '" + axis +
                      "' (expected rho_c, theta, epsilon, nu1, nu2 or gamma)");
  }
  workers = std::max<std::size_t>(workers, 1);
  const auto start = Clock::now();

  if (axis == "rho_c") {
    validate(cfg, Command::equilibrium);
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!(values[k] > 0.0)) throw ConfigError("rho_c sweep values must be > 0");
      if (k > 0 && !(values[k] > values[k - 1])) {
        throw ConfigError("rho_c sweep values must be strictly increasing");
      }
    }
    json manifest = base_manifest("sweep", cfg);
    manifest["axis"] = axis;
    manifest["values"] = values;
    prepare_dir(out, cfg);
    CommandResult res;
    try {
      const EosPtr eos = build_eos(cfg);
      const MassCurve curve = critical_mass_scan(*eos, values, cfg.equilibrium.G,
                                                 cfg.equilibrium.ode_tol, workers);
      CsvWriter mc(out / "mass_curve.csv", {"rho_c", "M", "R"});
      CsvWriter summary(out / "summary.csv", {"index", "rho_c", "status", "M", "R", "running_max"});
      std::size_t failed = 0;
      for (std::size_t k = 0; k < curve.points.size(); ++k) {
        const auto& p = curve.points[k];
        if (p.ok) mc.row({p.rho_c, p.M, p.R});
        failed += p.ok ? 0 : 1;
        summary.row_text({std::to_string(k), fmt_g(p.rho_c), p.ok ? "ok" : "failed",
                          p.ok ? fmt_g(p.M) : "", p.ok ? fmt_g(p.R) : "",
                          fmt_g(curve.running_max[k])});
        if (!p.ok) warn(fmt::format("rho_c = {}: {}", p.rho_c, p.error));
      }
      manifest["mass_curve"] = {{"Mc_estimate", curve.Mc_estimate},
                                {"last_decade_increment", curve.last_decade_increment},
                                {"rising_at_edge", curve.rising_at_edge},
                                {"plateau", curve.plateau},
                                {"failed_points", failed}};
      if (failed > 0) {
        res = {kExitNumerical, "partial_failure", fmt::format("{} points failed", failed)};
      }
    } catch (const vstar::Error& e) {
      res = failure(e);
    }
    finish(manifest, out, start, res);
    return res;
  }

  // Every point is validated before any compute.
  std::vector<RunConfig> points;
  for (double v : values) {
    RunConfig c = cfg;
    apply_axis(c, axis, v);
    c.sweep = {};
    try {
      validate(c, Command::simulate);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("sweep {} = {}: {}", axis, v, e.what()));
    }
    points.push_back(std::move(c));
  }
  json manifest = base_manifest("sweep", cfg);
  manifest["axis"] = axis;
  manifest["values"] = values;
  prepare_dir(out, cfg);

  std::vector<SimulateSummary> results(points.size());
  parallel_for(points.size(), workers, [&](std::size_t k) {
    results[k] = simulate_into(points[k], out / fmt::format("{}_{:03d}", axis, k));
  });

  CsvWriter summary(out / "summary.csv", {"index", axis, "status", "frakE0", "D1_fitted",
                                          "D1_predicted", "all_fits_pass", "failure_time"});
  json points_json = json::array();
  std::size_t failed = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    std::string d1_fit, d1_pred;
    bool all_pass = !r.fits.empty();
    for (const auto& f : r.fits) {
      all_pass = all_pass && f.pass;
      if (f.quantity == "D1") {
        d1_pred = fmt_g(f.predicted_exponent);
        if (!f.vacuous && f.note.empty()) d1_fit = fmt_g(f.fitted_exponent);
      }
    }
    failed += r.result.exit_code == kExitOk ? 0 : 1;
    summary.row_text({std::to_string(k), fmt_g(values[k]), r.result.status,
                      std::isnan(r.frakE0) ? "" : fmt_g(r.frakE0), d1_fit, d1_pred,
                      r.fits.empty() ? "" : (all_pass ? "1" : "0"),
                      std::isnan(r.failure_time) ? "" : fmt_g(r.failure_time)});
    points_json.push_back({{"index", k},
                           {"value", values[k]},
                           {"directory", fmt::format("{}_{:03d}", axis, k)},
                           {"status", r.result.status}});
  }
  manifest["points"] = points_json;
  CommandResult res;
  if (failed > 0) res = {kExitNumerical, "partial_failure", fmt::format("{} points failed", failed)};
  finish(manifest, out, start, res);
  return res;
}

}  // namespace vstar::cli
