// The vstar subcommands. Each writes its outputs and a manifest.json into the output
// directory and returns an exit code: 0 success, 1 numerical failure, 2 configuration error.
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace vstar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;

struct CommandResult {
  int exit_code = kExitOk;
  std::string status = "ok";
  std::string message;
};

[[nodiscard]] std::string version();

/// Each throws ConfigError before writing anything if the configuration is invalid.
CommandResult cmd_equilibrium(const RunConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out,
                        const std::string& axis, const std::vector<double>& values,
                        std::size_t workers);
CommandResult cmd_check_eos(const RunConfig& cfg, const std::filesystem::path& out);

}  // namespace vstar::cli
