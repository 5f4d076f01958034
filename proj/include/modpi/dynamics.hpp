#pragma once
#include <vector>

#include "modpi/phasespace.hpp"

namespace modpi {

// Throws ResonantTime when Omega*T lies within tol of a multiple of pi.
void check_nonresonant(double omega_T, double tol = 1e-9);

// Stationary path of the modular action in one winding sector:
// X(t) = chi + xi sin(Omega(t - tm)) - J xi cos(Omega(t - tm)), tm the midpoint, J = omega^-1 G.
struct TrajectoryW {
  PhasePoint W, chi, xi, X0, Xf;
  double t0 = 0, tf = 1;
  PhysicalParams params;

  PhasePoint operator()(double t) const;
  PhasePoint velocity(double t) const;
  PhasePoint acceleration(double t) const;
  // Final point on the universal cover, Xf + W.
  PhasePoint end() const { return Xf + W; }
};

TrajectoryW stationary_path(const PhasePoint& X0, const PhasePoint& Xf, const PhasePoint& W,
                            double t0, double tf, const PhysicalParams& p);
TrajectoryW stationary_path(const PhasePoint& X0, const PhasePoint& Xf, const LatticeVector& W,
                            double t0, double tf, const PhysicalParams& p);

// L = -Xdot.A(X) + G(Xdot, Xdot) / 2 Omega
double modular_lagrangian(const PhasePoint& X, const PhasePoint& Xdot, const Gauge& g,
                          const PhysicalParams& p);

// Closed form: -hbar alpha(Y) + hbar alpha(X0) - omega(X0, Y)/2 + cot(Omega T/2) G(Y-X0, Y-X0)/4
double onshell_action(const TrajectoryW& tr, const Gauge& g);
// Composite Gauss-Legendre quadrature of the Lagrangian along the path.
double onshell_action_quadrature(const TrajectoryW& tr, const Gauge& g, int panels = 10,
                                 int order = 20);
// Action of an arbitrary path given by position and velocity samplers.
template <class Pos, class Vel>
double action_of(const Pos& X, const Vel& V, double t0, double tf, const Gauge& g,
                 const PhysicalParams& p, int panels = 10, int order = 20);

struct CurrentReport {
  PhasePoint chi_current;
  double energy = 0;
  Mat J;  // antisymmetric d x d, empty at d = 1
  double kappa = 0;
};

CurrentReport noether_currents(const TrajectoryW& tr, double t);
// Max deviation of each current over `samples` times, scaled by max(1, |value|).
struct CurrentDrift {
  double chi = 0, energy = 0, J = 0, kappa = 0;
  double max() const;
};
CurrentDrift current_drift(const TrajectoryW& tr, int samples = 50);

// Hamilton's principal function S(X, t) from X0 at t0 and its derivatives.
double principal_function(const PhasePoint& X, double t, const PhasePoint& X0, double t0,
                          const PhysicalParams& p, const Gauge& g);
Vec principal_momentum(const PhasePoint& X, double t, const PhasePoint& X0, double t0,
                       const PhysicalParams& p, const Gauge& g);

// H_mod(X, P) = Omega/2 G^-1(P + A(X), P + A(X))
double modular_hamiltonian(const PhasePoint& X, const Vec& P, const Gauge& g,
                           const PhysicalParams& p);

struct HJReport {
  double residual = 0;     // dS/dt + H_mod(X, dS/dX), analytic derivatives
  double residual_fd = 0;  // same with central differences
  double grad_mismatch = 0;  // max |analytic - FD| over all 2d+1 partials
  double energy_scale = 0;
};
HJReport hamilton_jacobi_residual(const PhasePoint& X, double t, const PhasePoint& X0, double t0,
                                  const PhysicalParams& p, const Gauge& g, double fd_step = 1e-5);

enum class Symmetry { Translation, TimeShift, Rotation, Symplectic };

struct VariationSpec {
  Symmetry which = Symmetry::Translation;
  PhasePoint E;  // translation vector
  Mat L;         // rotation generator (antisymmetric, d >= 2)
};

struct VariationReport {
  std::vector<double> sizes;     // variation sizes s
  std::vector<double> mismatch;  // |dS - s [F]| / max(|s [F]|, s * scale)
  double worst = 0;
  double slope = 0;  // log-log slope of mismatch vs s (1 for a first-order scheme)
};

// Compares the action change under the finite variation of size s with the
// boundary value of the total-derivative term F, for s in {1e-3, 1e-4, 1e-5}.
VariationReport symmetry_variation_check(const TrajectoryW& tr, const VariationSpec& v,
                                         const Gauge& g);

}  // namespace modpi

#include "modpi/quadrature.hpp"

template <class Pos, class Vel>
double modpi::action_of(const Pos& X, const Vel& V, double t0, double tf, const Gauge& g,
                        const PhysicalParams& p, int panels, int order) {
  const QuadRule q = gauss_legendre(order, t0, tf, panels);
  double s = 0;
  for (int i = 0; i < q.size(); ++i) s += q.w[i] * modular_lagrangian(X(q.x[i]), V(q.x[i]), g, p);
  return s;
}
