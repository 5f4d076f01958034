#pragma once
#include <vector>

namespace modpi {

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
  int size() const { return static_cast<int>(x.size()); }
};

// n-point Gauss-Legendre on [a, b], optionally repeated over equal panels.
QuadRule gauss_legendre(int n, double a = -1.0, double b = 1.0, int panels = 1);

}  // namespace modpi
