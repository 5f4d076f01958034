// modpi: batch runs of the modular path-integral checks.
//
//   modpi [--config PATH] [--out DIR] [--seed N] [--threads N] [--set key=value ...] <command>
//   modpi --print-config
//
// Commands: theta, propagate, dynamics, legendre, limit.
// Exit codes: 0 ok, 1 tolerance failure, 2 config/validation error, 3 numeric-domain error.

#include <CLI11.hpp>
#include <iostream>

#include "modpi/commands.hpp"

int main(int argc, char** argv) {
  using namespace modpi;
  CLI::App app{"Modular-space path integral of the harmonic oscillator"};
  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  int threads = -1;
  bool print_config = false;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (output.dir)");
  app.add_option("--seed", seed, "random seed (seed)");
  app.add_option("--threads", threads, "OpenMP threads, 0 = runtime default (threads)");
  app.add_option("--set", overrides, "override a config key, e.g. --set propagate.T=[0.2,0.5]")
      ->allow_extra_args(false);
  app.add_flag("--print-config", print_config, "print the effective config and exit");

  using Cmd = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::pair<const char*, Cmd>> commands = {
      {"theta", cmd_theta},       {"propagate", cmd_propagate}, {"dynamics", cmd_dynamics},
      {"legendre", cmd_legendre}, {"limit", cmd_limit}};
  const std::map<std::string, std::string> help = {
      {"theta", "theta identity residuals at random points -> theta.csv"},
      {"propagate", "amplitudes by every route and the cross-route summary -> propagate.jsonl"},
      {"dynamics", "stationary path samples with conserved currents -> dynamics.csv"},
      {"legendre", "modular Legendre transform checks -> legendre.csv, legendre_kin.csv"},
      {"limit", "Schrodinger-limit lattice ladder -> limit.csv, limit_fit.csv"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name))->fallthrough();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
  if (threads >= 0) overrides.push_back("threads=" + std::to_string(threads));
  if (!out_dir.empty()) overrides.push_back("output.dir=\"" + out_dir + "\"");

  RunConfig cfg;
  try {
    cfg = load_config(config_path, overrides);
  } catch (const std::exception& e) {
    std::cerr << "modpi: " << error_name(e) << ": " << e.what() << '\n';
    return kExitConfig;
  }
  if (print_config) {
    std::cout << config_to_json_text(cfg) << '\n';
    return kExitOk;
  }
  set_threads(cfg.threads);

  for (const auto& [name, fn] : commands) {
    if (!app.got_subcommand(name)) continue;
    try {
      const int rc = fn(cfg, std::cout);
      if (rc == kExitTolerance) std::cerr << "modpi " << name << ": tolerance check failed\n";
      return rc;
    } catch (const std::exception& e) {
      std::cerr << "modpi " << name << ": " << error_name(e) << ": " << e.what() << '\n';
      return exit_code_for(e);
    }
  }
  std::cerr << app.help();
  return kExitConfig;
}
