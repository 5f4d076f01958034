#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modpi/propagator.hpp"

// Run configuration for the command-line tool. The file is JSON with nested
// sections; every key has a default, so an empty object is a valid config.

namespace modpi {

struct ConfigError : Error { using Error::Error; };

struct RunConfig {
  PhysicalParams params;
  std::vector<double> lattice_scales{1.0};
  // An explicit (lambda, lambda_tilde) replaces the scale ladder; checked against 2 pi hbar.
  std::optional<std::array<double, 2>> lattice_explicit;
  Gauge gauge;

  double epsilon = 0.125;
  std::vector<double> rho{0.5, 1.0, 2.0};
  Regulator regulator = Regulator::Identity;

  ThetaTruncation trunc{1e-14, 512};
  int winding_cut = 8;
  int n_zak = 14;

  std::vector<int> slices{2, 4};
  int order = 48;
  double budget = 2e7;

  // coherent-state labels used to smear amplitudes
  cplx z0{-0.1, 0.25}, zf{0.3, 0.2};

  struct Theta {
    std::vector<int> dims{1, 2};
    int points = 200;
    double tolerance = 1e-10;
    std::optional<CMat> tau;
  } theta;

  struct Propagate {
    std::vector<double> T{0.2};
    std::vector<std::array<double, 4>> endpoints{{-0.3, 0.4, 0.1, 0.2}};  // x0, xt0, xf, xtf
    double tolerance = 5e-2;
    bool sectors = false;
    int wmax = 4;
  } propagate;

  struct Dynamics {
    double T = 1.3;
    std::array<double, 2> X0{0.2, -0.4}, Xf{-0.7, 0.3};
    std::array<int, 2> W{1, -1};
    int samples = 50;
    double tolerance = 1e-10;
  } dynamics;

  struct Legendre {
    std::optional<Mat> M;  // oscillator M = Omega G when absent
    double tolerance = 1e-12;
  } legendre;

  struct Limit {
    std::vector<double> ladder{2, 4, 8, 16};
    double T = 1.0;
  } limit;

  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = "out";

  // Throws ConfigError; physical invariants throw the library's own errors.
  void validate() const;
  AmplitudeRequest request(double T, double lattice_scale) const;
};

// defaults <- file (if non-empty path) <- key=value overrides (dotted keys, JSON values)
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& c);

}  // namespace modpi
