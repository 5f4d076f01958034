#include "modpi/zak.hpp"

#include <cmath>

#include "modpi/quadrature.hpp"

namespace modpi {

SchrodingerWavefunction::SchrodingerWavefunction(Fn f, Fn df, double norm, double centre,
                                                 double reach)
    : f_(std::move(f)), df_(std::move(df)), norm_(norm), centre_(centre), reach_(reach) {}

SchrodingerWavefunction SchrodingerWavefunction::gaussian(double q, double p, double sigma,
                                                          double hbar) {
  if (!(sigma > 0)) throw InvalidParams("Gaussian width must be positive");
  const double c = std::pow(2 * kPi * sigma * sigma, -0.25);
  auto f = [=](double x) {
    return c * std::exp(-(x - q) * (x - q) / (4 * sigma * sigma) + kI * (p * x / hbar));
  };
  auto df = [=](double x) {
    return f(x) * (-(x - q) / (2 * sigma * sigma) + kI * (p / hbar));
  };
  SchrodingerWavefunction s(f, df, 1.0, q, 12.5 * sigma);
  s.gauss_ = GaussianSpec{q, p, sigma};
  s.hbar_ = hbar;
  return s;
}

SchrodingerWavefunction SchrodingerWavefunction::coherent(double q, double p,
                                                          const PhysicalParams& prm) {
  return gaussian(q, p, std::sqrt(prm.hbar / (2 * prm.mw())), prm.hbar);
}

std::vector<double> hermite_functions(int nmax, double xi) {
  std::vector<double> h(nmax + 2);
  h[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
  h[1] = std::sqrt(2.0) * xi * h[0];
  for (int k = 1; k <= nmax; ++k)
    h[k + 1] = std::sqrt(2.0 / (k + 1)) * xi * h[k] - std::sqrt(double(k) / (k + 1)) * h[k - 1];
  h.resize(nmax + 1);
  return h;
}

SchrodingerWavefunction SchrodingerWavefunction::hermite(int n, const PhysicalParams& prm) {
  if (n < 0) throw InvalidParams("Hermite index must be >= 0");
  const double k = std::sqrt(prm.mw() / prm.hbar);  // 1 / oscillator length
  const double amp = std::sqrt(k);
  auto f = [=](double x) { return cplx(amp * hermite_functions(n, k * x)[n]); };
  auto df = [=](double x) {
    const auto h = hermite_functions(n + 1, k * x);
    const double lo = n > 0 ? std::sqrt(n / 2.0) * h[n - 1] : 0.0;
    return cplx(amp * k * (lo - std::sqrt((n + 1) / 2.0) * h[n + 1]));
  };
  SchrodingerWavefunction s(f, df, 1.0, 0.0, (std::sqrt(2.0 * n + 1) + 9.5) / k);
  s.hermite_ = n;
  s.hbar_ = prm.hbar;
  return s;
}

SchrodingerWavefunction SchrodingerWavefunction::times_x() const {
  auto f = f_;
  return {[f](double x) { return x * f(x); }, nullptr, 0.0, centre_, reach_};
}

SchrodingerWavefunction SchrodingerWavefunction::momentum(double hbar) const {
  auto df = df_;
  return {[df, hbar](double x) { return -kI * hbar * df(x); }, nullptr, 0.0, centre_, reach_};
}

namespace {

void check_tail(const SchrodingerWavefunction& psi, double x, double lam, double lt, int N) {
  double tail = 0;
  for (int k = N + 1; k <= N + 3; ++k) tail += std::abs(psi(x + lam * k)) + std::abs(psi(x - lam * k));
  if (tail / std::sqrt(lt) > 1e-12)
    throw TailTooLarge("wavefunction decays too slowly for the Zak truncation");
}

}  // namespace

cplx zak_transform(const SchrodingerWavefunction& psi, const ModularLattice& lat, const Gauge& g,
                   const PhasePoint& X, const PhysicalParams& prm, int n_zak) {
  if (X.dim() != 1 || lat.dim() != 1) throw UnsupportedDim("Zak transform is implemented for d = 1");
  const double x = X.x[0], xt = X.xt[0], lam = lat.lambda[0], lt = lat.lambda_tilde[0];
  const double h = prm.hbar;
  check_tail(psi, x, lam, lt, n_zak);
  cplx s = 0;
  for (int n = -n_zak; n <= n_zak; ++n)
    s += std::exp(-kI * (xt * lam * n / h)) * psi(x + lam * n);
  return std::exp(-kI * (g.alpha(X, h) + 0.5 * x * xt / h)) * s / std::sqrt(lt);
}

ZakJet zak_jet(const SchrodingerWavefunction& psi, const ModularLattice& lat, const Gauge& g,
               const PhasePoint& X, const PhysicalParams& prm, int n_zak) {
  if (X.dim() != 1 || lat.dim() != 1) throw UnsupportedDim("Zak transform is implemented for d = 1");
  const double x = X.x[0], xt = X.xt[0], lam = lat.lambda[0], lt = lat.lambda_tilde[0];
  const double h = prm.hbar;
  check_tail(psi, x, lam, lt, n_zak);
  cplx s = 0, sx = 0, sxt = 0;
  for (int n = -n_zak; n <= n_zak; ++n) {
    const cplx e = std::exp(-kI * (xt * lam * n / h));
    const cplx v = psi(x + lam * n);
    s += e * v;
    sx += e * psi.derivative(x + lam * n);
    sxt += (-kI * (lam * n / h)) * e * v;
  }
  const cplx pre = std::exp(-kI * (g.alpha(X, h) + 0.5 * x * xt / h)) / std::sqrt(lt);
  const Vec ga = g.grad(X, h);
  const cplx dpre_x = -kI * (ga[0] + 0.5 * xt / h);
  const cplx dpre_xt = -kI * (ga[1] + 0.5 * x / h);
  return {pre * s, pre * (dpre_x * s + sx), pre * (dpre_xt * s + sxt)};
}

ModularWavefunction::ModularWavefunction(Fn f, ModularLattice lat, Gauge g, PhysicalParams prm,
                                         int n_zak)
    : f_(std::move(f)), lat_(std::move(lat)), gauge_(g), prm_(prm), n_zak_(n_zak) {}

ModularWavefunction ModularWavefunction::zak(const SchrodingerWavefunction& psi,
                                             const ModularLattice& lat, const Gauge& g,
                                             const PhysicalParams& prm, int n_zak) {
  return {[=](const PhasePoint& X) { return zak_transform(psi, lat, g, X, prm, n_zak); }, lat, g,
          prm, n_zak};
}

ModularWavefunction weyl_action(const ModularWavefunction& phi, const PhasePoint& Y) {
  const auto& prm = phi.params();
  const Gauge g = phi.gauge();
  const ModularLattice lat = phi.lattice();
  auto f = [phi, Y, g, lat, prm](const PhasePoint& X) {
    const double h = prm.hbar;
    const PhasePoint Z = X - Y;
    auto [Z0, K] = reduce_to_cell(Z, lat);
    // phi(Z0 + K) = e^{-i beta(Z0, K)} phi(Z0)
    const cplx phiZ = std::exp(-kI * beta_phase(Z0, K, g, prm)) * phi(Z0);
    const double ph = symplectic(Y, Z) / (2 * h) - (g.alpha(X, h) - g.alpha(Z, h));
    return std::exp(kI * ph) * phiZ;
  };
  return {f, lat, g, prm, phi.n_zak()};
}

ModularWavefunction gauge_relabel(const ModularWavefunction& phi, const Gauge& g) {
  const Gauge old = phi.gauge();
  const double h = phi.params().hbar;
  auto f = [phi, old, g, h](const PhasePoint& X) {
    return std::exp(-kI * (g.alpha(X, h) - old.alpha(X, h))) * phi(X);
  };
  return {f, phi.lattice(), g, phi.params(), phi.n_zak()};
}

CellGrid make_cell_grid(const ModularLattice& lat, int order) {
  if (lat.dim() != 1) throw UnsupportedDim("cell quadrature is implemented for d = 1");
  const QuadRule qx = gauss_legendre(order, -lat.lambda[0] / 2, lat.lambda[0] / 2);
  const QuadRule qp = gauss_legendre(order, -lat.lambda_tilde[0] / 2, lat.lambda_tilde[0] / 2);
  CellGrid g;
  g.pts.reserve(order * order);
  g.w.reserve(order * order);
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) {
      g.pts.emplace_back(qx.x[i], qp.x[j]);
      g.w.push_back(qx.w[i] * qp.w[j]);
    }
  return g;
}

cplx inner_product(const ModularWavefunction& a, const ModularWavefunction& b, int order, Exec ex) {
  if (!(a.gauge() == b.gauge())) throw GaugeMismatch("inner product across different gauges");
  if (!(a.lattice() == b.lattice())) throw LatticeMismatch("inner product across different lattices");
  const CellGrid grid = make_cell_grid(a.lattice(), order);
  double re = 0, im = 0;
  const int n = grid.size();
  if (ex == Exec::Parallel) {
#pragma omp parallel for reduction(+ : re, im) schedule(static)
    for (int i = 0; i < n; ++i) {
      const cplx v = grid.w[i] * std::conj(a(grid.pts[i])) * b(grid.pts[i]);
      re += v.real();
      im += v.imag();
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const cplx v = grid.w[i] * std::conj(a(grid.pts[i])) * b(grid.pts[i]);
      re += v.real();
      im += v.imag();
    }
  }
  return {re, im};
}

}  // namespace modpi
