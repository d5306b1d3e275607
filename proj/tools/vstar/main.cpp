#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "vstar/errors.hpp"

int main(int argc, char** argv) {
  using namespace vstar::cli;

  CLI::App app{"vstar: equilibria and viscous dynamics of self-gravitating gaseous stars"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::size_t workers = 1;
  std::string axis;
  std::vector<double> values;
  bool values_given = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", workers, "worker threads")->capture_default_str()
        ->check(CLI::PositiveNumber);
  };
  auto* eq = app.add_subcommand("equilibrium", "solve for the equilibrium profile");
  auto* sim = app.add_subcommand("simulate", "run a perturbed trajectory with diagnostics");
  auto* sweep = app.add_subcommand("sweep", "repeat a run over values of one parameter");
  auto* check = app.add_subcommand("check-eos", "sample the structure conditions of the EOS");
  for (auto* sub : {eq, sim, sweep, check}) add_common(sub);
  sweep->add_option("--axis", axis, "rho_c, theta, epsilon, nu1, nu2 or gamma");
  sweep->add_option("--values", values, "comma-separated values")
      ->delimiter(',')
      ->each([&](const std::string&) { values_given = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const RunConfig cfg = load_config(config_path);
    CommandResult res;
    if (*eq) {
      res = cmd_equilibrium(cfg, out_dir);
    } else if (*sim) {
      res = cmd_simulate(cfg, out_dir);
    } else if (*sweep) {
      const std::string a = axis.empty() ? cfg.sweep.axis : axis;
      if (a.empty()) throw ConfigError("sweep needs --axis or sweep.axis");
      res = cmd_sweep(cfg, out_dir, a, values_given ? values : cfg.sweep.values, workers);
    } else {
      res = cmd_check_eos(cfg, out_dir);
    }
    if (res.exit_code != kExitOk) std::cerr << "error: " << res.message << '\n';
    return res.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const vstar::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
