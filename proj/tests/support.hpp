#pragma once
#include <cmath>
#include <complex>
#include <random>

#include "modpi/phasespace.hpp"

namespace testsupport {

inline double rel(std::complex<double> a, std::complex<double> b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Distance between two phases on the circle.
inline double phase_dist(double a, double b) {
  return std::abs(std::remainder(a - b, 2 * modpi::kPi));
}

struct Rng {
  std::mt19937_64 g;
  explicit Rng(unsigned long long seed) : g(seed) {}
  double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(g); }
  modpi::PhasePoint point(double s) { return {uni(-s, s), uni(-s, s)}; }
};

}  // namespace testsupport
