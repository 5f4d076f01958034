#pragma once
#include <exception>
#include <iosfwd>

#include "modpi/config.hpp"

// Batch commands behind the CLI. Each writes its tables into cfg.out_dir and
// returns a process exit code.

namespace modpi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;

// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);
// Class name of a library error, for diagnostics and record flags.
const char* error_name(const std::exception& e);

int cmd_theta(const RunConfig& cfg, std::ostream& log);       // theta.csv
int cmd_propagate(const RunConfig& cfg, std::ostream& log);   // propagate.jsonl
int cmd_dynamics(const RunConfig& cfg, std::ostream& log);    // dynamics.csv
int cmd_legendre(const RunConfig& cfg, std::ostream& log);    // legendre.csv, legendre_kin.csv
int cmd_limit(const RunConfig& cfg, std::ostream& log);       // limit.csv, limit_fit.csv

}  // namespace modpi
