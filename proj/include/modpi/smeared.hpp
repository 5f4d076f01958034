#pragma once
#include <vector>

#include "modpi/propagator.hpp"
#include "modpi/quadrature.hpp"
#include "modpi/zak.hpp"

// Amplitudes smeared against Gaussian states. Pointwise kernels are
// distributions; every oracle comparison goes through this layer.

namespace modpi {

// psi(y) = C exp(-a y^2 + b y), Re a > 0.
struct GaussianState {
  cplx a, b, C;

  static GaussianState make(const GaussianSpec& s, double hbar);
  // Oscillator coherent state |z>, z = (sqrt(m Omega) q + i p / sqrt(m Omega)) / sqrt(2 hbar),
  // phased so that <z'|z> = exp(-|z'|^2/2 - |z|^2/2 + conj(z') z).
  static GaussianState coherent(cplx z, const PhysicalParams& p);

  cplx operator()(double y) const { return C * std::exp(-a * y * y + b * y); }
  double centre() const { return b.real() / (2 * a.real()); }
  // |psi| has dropped by e^-40 at this distance from the centre.
  double reach() const { return std::sqrt(40.0 / a.real()); }
  SchrodingerWavefunction wavefunction() const;
};

// Exact oscillator evolution for complex T with Im T <= 0.
GaussianState evolve_gaussian(const GaussianState& s, cplx T, const PhysicalParams& p);
// <f|g>
cplx gaussian_overlap(const GaussianState& f, const GaussianState& g);
// <f| exp(-i H T / hbar) |g> in closed form.
cplx smeared_oracle(const GaussianState& f, const GaussianState& g, cplx T, const PhysicalParams& p);

// <n|psi> for n < cutoff, by quadrature against oscillator eigenfunctions.
std::vector<cplx> fock_coefficients(const SchrodingerWavefunction& psi, const PhysicalParams& p,
                                    int cutoff = 64);
cplx fock_amplitude(const SchrodingerWavefunction& f, const SchrodingerWavefunction& g, cplx T,
                    const PhysicalParams& p, int cutoff = 64);

// Tensor Gauss-Legendre rule on the centred cell (d = 1), kept as two axes so
// kernels that factorise can be applied axis by axis. Flat index is i * Q + j.
struct CellTensor {
  QuadRule x, xt;
  static CellTensor make(const ModularLattice& lat, int order);
  int order() const { return x.size(); }
  int size() const { return x.size() * xt.size(); }
  PhasePoint at(int i, int j) const { return {x.x[i], xt.x[j]}; }
  double weight(int i, int j) const { return x.w[i] * xt.w[j]; }
};

// Zak transform sampled on the grid.
std::vector<cplx> zak_on_grid(const SchrodingerWavefunction& psi, const CellTensor& grid,
                              const AmplitudeRequest& req, int n_zak);

// Cell quadrature of conj(phi_f) A phi_0 with the exact kernel at T - i eps / Omega.
cplx smeared_exact_amplitude(const AmplitudeRequest& req, const SchrodingerWavefunction& f,
                             const SchrodingerWavefunction& g, int order = 20,
                             Exec ex = Exec::Parallel);

// Values on an epsilon ladder eps = rho Omega dt and the polynomial
// extrapolation to rho = 0.
struct LadderResult {
  std::vector<double> rho;
  std::vector<cplx> values;
  cplx extrapolated;
};
cplx extrapolate_to_zero(const std::vector<double>& rho, const std::vector<cplx>& v);

struct OneStepOptions {
  int x0_order = 24;
  int window_order = 64;
  int window_order_fine = 96;  // used for rho < 1, where the kernel is narrowest
  int n_zak = 8;
  double window_widths = 7.0;
  std::vector<double> rho{2.0, 1.0, 0.5};
};

// One slice of the theta amplitude smeared against Zak states: X0 over the
// cell, Xf = X0 + dX over a window matched to the kernel width.
LadderResult smeared_one_step(const AmplitudeRequest& req, const SchrodingerWavefunction& f,
                              const SchrodingerWavefunction& g, double dt,
                              const OneStepOptions& o = {}, Exec ex = Exec::Parallel);

// v(X) -> sum_X0 w(X0) K_dt(X, X0) v(X0) over the fixed cell grid.
// Parallel factorises the kernel along the two axes, O(Q^3);
// Serial is the direct O(Q^4) sum through infinitesimal_amplitude_theta.
std::vector<cplx> smeared_transfer(const std::vector<cplx>& v, const CellTensor& grid, double dt,
                                   const AmplitudeRequest& req, Exec ex = Exec::Parallel);

struct ComposeOptions {
  int order = 48;
  int n_zak = 14;
  std::vector<double> rho{2.0, 1.0, 0.5};
};
// N slices of duration T / N with eps = rho Omega dt per slice.
cplx smeared_compose(const AmplitudeRequest& req, const SchrodingerWavefunction& f,
                     const SchrodingerWavefunction& g, int N, double rho, int order, int n_zak,
                     Exec ex = Exec::Parallel);
LadderResult smeared_compose_ladder(const AmplitudeRequest& req, const SchrodingerWavefunction& f,
                                    const SchrodingerWavefunction& g, int N,
                                    const ComposeOptions& o = {}, Exec ex = Exec::Parallel);

// Winding decomposition of the smeared amplitude:
// A_w = sum_n int_{box(n+w)} dx int_{box n} dy conj psi_f(x) K_T(x, y) psi_0(y),
// box n = [lambda (n - 1/2), lambda (n + 1/2)). Gauge independent.
struct SmearedSectors {
  std::vector<SectorValue> sectors;
  cplx total;   // sum over the computed sectors
  cplx mehler;  // closed-form <psi_f|U|psi_0>
  cplx sector(int w) const;
};
SmearedSectors smeared_sectors(const GaussianState& f, const GaussianState& g, cplx T, double lambda,
                               const PhysicalParams& p);

struct LimitRow {
  double lambda = 0;
  cplx modular, mehler;
  double total_diff = 0;  // |modular - mehler|, zero up to rounding by completeness
  double w0_diff = 0;     // |A_0 - mehler|, evaluated as |sum_{w != 0} A_w|
  double share = 0;       // |A_0| / sum_w |A_w|
  double offsector = 0;   // sum_{w != 0} |A_w|
  double zak_error = 0;   // sup |sqrt(lt) phi - psi| on x in [-1, 1]
};
struct LimitScan {
  std::vector<LimitRow> rows;
  double fit_c = 0, fit_log_a = 0;  // offsector ~ exp(fit_log_a - fit_c lambda^2)
  bool share_monotone = false, w0_diff_decreasing = false, zak_decreasing = false;
};
// Ladder entries are in units of sqrt(hbar / m Omega); Schrodinger gauge throughout.
LimitScan schrodinger_limit_scan(const GaussianState& psi0, const GaussianState& psif, double T,
                                 const std::vector<double>& ladder, const PhysicalParams& p);

}  // namespace modpi
