#pragma once
#include <functional>
#include <optional>
#include <vector>

#include "modpi/parallel.hpp"
#include "modpi/phasespace.hpp"

namespace modpi {

// psi(x) = (2 pi s^2)^{-1/4} exp(-(x-q)^2 / 4s^2 + i p x / hbar)
struct GaussianSpec {
  double q = 0, p = 0, sigma = 1;
};

// Position-space state at d = 1. Built-ins carry analytic derivatives and
// closed-form norms; `reach` bounds the support to double precision.
class SchrodingerWavefunction {
 public:
  using Fn = std::function<cplx(double)>;

  SchrodingerWavefunction(Fn f, Fn df, double norm, double centre, double reach);

  static SchrodingerWavefunction gaussian(double q, double p, double sigma, double hbar);
  // Ground-state width, i.e. a coherent state of the oscillator.
  static SchrodingerWavefunction coherent(double q, double p, const PhysicalParams& prm);
  // n-th oscillator eigenfunction.
  static SchrodingerWavefunction hermite(int n, const PhysicalParams& prm);

  cplx operator()(double x) const { return f_(x); }
  cplx derivative(double x) const { return df_(x); }
  double norm() const { return norm_; }
  double centre() const { return centre_; }
  double reach() const { return reach_; }
  const std::optional<GaussianSpec>& gaussian_spec() const { return gauss_; }
  std::optional<int> hermite_index() const { return hermite_; }
  double hbar() const { return hbar_; }

  // x psi and -i hbar psi' as wavefunctions (derivative slots left empty).
  SchrodingerWavefunction times_x() const;
  SchrodingerWavefunction momentum(double hbar) const;

 private:
  Fn f_, df_;
  double norm_ = 1, centre_ = 0, reach_ = 0, hbar_ = 1;
  std::optional<GaussianSpec> gauss_;
  std::optional<int> hermite_;
};

// Normalised oscillator eigenfunctions h_0..h_nmax at xi = x sqrt(m Omega / hbar),
// in units where the xi-norm is one.
std::vector<double> hermite_functions(int nmax, double xi);

// <X|psi> = lt^{-1/2} e^{-i alpha(X)} e^{-i x xt / 2 hbar} sum_{|n|<=N} e^{-i xt lambda n / hbar} psi(x + lambda n)
cplx zak_transform(const SchrodingerWavefunction& psi, const ModularLattice& lat, const Gauge& g,
                   const PhasePoint& X, const PhysicalParams& prm, int n_zak = 24);

struct ZakJet {
  cplx value, d_x, d_xt;
};
// Value and analytic phase-space gradient of the Zak transform.
ZakJet zak_jet(const SchrodingerWavefunction& psi, const ModularLattice& lat, const Gauge& g,
               const PhasePoint& X, const PhysicalParams& prm, int n_zak = 24);

class ModularWavefunction {
 public:
  using Fn = std::function<cplx(const PhasePoint&)>;

  ModularWavefunction(Fn f, ModularLattice lat, Gauge g, PhysicalParams prm, int n_zak = 24);
  static ModularWavefunction zak(const SchrodingerWavefunction& psi, const ModularLattice& lat,
                                 const Gauge& g, const PhysicalParams& prm, int n_zak = 24);

  cplx operator()(const PhasePoint& X) const { return f_(X); }
  const ModularLattice& lattice() const { return lat_; }
  const Gauge& gauge() const { return gauge_; }
  const PhysicalParams& params() const { return prm_; }
  int n_zak() const { return n_zak_; }

 private:
  Fn f_;
  ModularLattice lat_;
  Gauge gauge_;
  PhysicalParams prm_;
  int n_zak_;
};

// (W_Y phi)(X) = e^{i omega(Y, X-Y) / 2hbar} e^{-i(alpha(X) - alpha(X-Y))} phi(X - Y),
// with X - Y folded back into the centred cell before phi is read.
ModularWavefunction weyl_action(const ModularWavefunction& phi, const PhasePoint& Y);

ModularWavefunction gauge_relabel(const ModularWavefunction& phi, const Gauge& g);

// Tensor Gauss-Legendre nodes on the centred cell (d = 1).
struct CellGrid {
  std::vector<PhasePoint> pts;
  std::vector<double> w;
  int size() const { return static_cast<int>(pts.size()); }
};
CellGrid make_cell_grid(const ModularLattice& lat, int order);

cplx inner_product(const ModularWavefunction& a, const ModularWavefunction& b, int order = 64,
                   Exec ex = Exec::Parallel);

}  // namespace modpi
