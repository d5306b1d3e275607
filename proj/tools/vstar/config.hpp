// Run configuration: an INI file with sections [eos], [equilibrium], [perturbation], [sim],
// [diagnostics], [check] and [sweep].
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vstar/diagnostics.hpp"
#include "vstar/eos.hpp"
#include "vstar/trajectory.hpp"

namespace vstar::cli {

/// Malformed or inconsistent configuration. line() is 0 when no single line is to blame.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct EosSection {
  std::string kind = "polytrope";  // polytrope | white_dwarf
  double kappa = 1.0;
  double gamma = 2.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
};

struct EquilibriumSection {
  std::optional<double> rho_c;
  std::optional<double> target_mass;
  double G = 1.0;
  double ode_tol = 1e-10;
  std::size_t n_cells = 512;
  double grading_q = 2.0;
  double rho_c_low = 1e-3;
  double rho_c_high = 1e3;
  double tol_mass = 1e-10;
};

struct PerturbationSection {
  std::string kind = "velocity_bump";
  double epsilon = 1e-3;
  double shape_exponent = 2.0;
};

struct DiagnosticsSection {
  double theta = 0.1;
  double l_fraction = 0.25;
  double e0_bound = 0.125;
  double fit_t_lo = 10.0;
  double fit_t_hi = 100.0;
  double slack = 0.15;
};

struct CheckSection {
  std::optional<double> s_max;
  std::size_t n_samples = 200;
  double decades = 12.0;
};

struct SweepSection {
  std::string axis;
  std::vector<double> values;
};

struct RunConfig {
  EosSection eos;
  EquilibriumSection equilibrium;
  PerturbationSection perturbation;
  SimConfig sim;
  DiagnosticsSection diagnostics;
  CheckSection check;
  SweepSection sweep;
  std::string source;  ///< config text as read
};

enum class Command { equilibrium, simulate, sweep, check_eos };

/// Parses INI text; `origin` names the source in messages. Unknown sections or keys and
/// unparseable values are errors naming the offending line.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::string& origin = "config");
[[nodiscard]] RunConfig load_config(const std::string& path);

/// Cross-field checks that need no heavy computation (EOS parameters, theta range against the
/// EOS exponent, time-stepping controls, fit window).
void validate(const RunConfig& cfg, Command command);

/// Sets one sweep axis (rho_c, theta, epsilon, nu1, nu2, gamma) to a value.
void apply_axis(RunConfig& cfg, const std::string& axis, double value);
[[nodiscard]] bool is_sweep_axis(const std::string& axis);

[[nodiscard]] EosPtr build_eos(const RunConfig& cfg);
[[nodiscard]] DiagnosticsConfig diagnostics_config(const RunConfig& cfg);
[[nodiscard]] Perturbation perturbation(const RunConfig& cfg);

/// The effective configuration (defaults filled in) as JSON.
[[nodiscard]] nlohmann::json to_json(const RunConfig& cfg);

/// The effective configuration as INI text that parse_config accepts.
[[nodiscard]] std::string to_ini(const RunConfig& cfg);

}  // namespace vstar::cli
