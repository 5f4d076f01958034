#include "modpi/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace modpi {

namespace {

// Newton on P_n from the Chebyshev-like initial guess; nodes ascending.
QuadRule reference_rule(int n) {
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    const double w = 2 / ((1 - x * x) * dp * dp);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = w;
  }
  if (n % 2) r.x[n / 2] = 0.0;
  return r;
}

const QuadRule& cached(int n) {
  static std::mutex mu;
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, reference_rule(n)).first;
  return it->second;
}

}  // namespace

QuadRule gauss_legendre(int n, double a, double b, int panels) {
  if (n < 1 || panels < 1) throw std::invalid_argument("quadrature order and panels must be >= 1");
  const QuadRule& ref = cached(n);
  QuadRule out;
  out.x.reserve(n * panels);
  out.w.reserve(n * panels);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < n; ++i) {
      out.x.push_back(lo + 0.5 * h * (ref.x[i] + 1));
      out.w.push_back(0.5 * h * ref.w[i]);
    }
  }
  return out;
}

}  // namespace modpi
