#pragma once
#include <functional>

#include "modpi/phasespace.hpp"

// Modular Legendre transform: H(Q) -> L_mod(X, Xdot) via
//   Xdot = omega^-1 dH/dQ,  Q = Q(Xdot),  L = -Xdot.A(X) + omega(Q, Xdot) - H(Q).
// The quadratic family H = Q^T M Q / 2 is done in closed matrix form; the
// pointwise entry takes any Hamiltonian with a gradient.

namespace modpi {

struct QuadraticHamiltonian {
  Mat M;  // 2d x 2d, symmetric positive definite

  // M = Omega G, the oscillator.
  static QuadraticHamiltonian oscillator(const PhysicalParams& p);
  // Throws InvalidParams (asymmetric, indefinite) or SingularM (condition > 1e12).
  void validate() const;
  double operator()(const Vec& Q) const { return 0.5 * Q.dot(M * Q); }
  Vec gradient(const Vec& Q) const { return M * Q; }
};

// L = -Xdot.A(X) + Xdot^T Kin Xdot / 2
struct ModularLagrangian {
  Mat kinetic;
  Gauge gauge;
  PhysicalParams params;

  double operator()(const PhasePoint& X, const PhasePoint& Xdot) const;
  // dL/dXdot
  Vec momentum(const PhasePoint& X, const PhasePoint& Xdot) const;
};

ModularLagrangian modular_legendre(const QuadraticHamiltonian& H, const Gauge& g,
                                   const PhysicalParams& p);

// Step 2 and its inverse for the quadratic family.
Vec velocity_of_charge(const QuadraticHamiltonian& H, const Vec& Q);   // omega^-1 M Q
Vec charge_of_velocity(const QuadraticHamiltonian& H, const Vec& Xdot);  // M^-1 omega Xdot

// Xddot = E Xdot from the Euler-Lagrange equations of L, with E = Kin^-1 (D - D^T),
// D = dA/dX read off the connection.
Mat euler_lagrange_matrix(const ModularLagrangian& L);

// Ordinary Legendre transform of L back to H_mod(X, P) = P.Xdot - L at Xdot(P).
double legendre_back(const ModularLagrangian& L, const PhasePoint& X, const Vec& P);
// H_mod expected for M: (P + A)^T omega^-1 M omega^-T (P + A) / 2.
double expected_modular_hamiltonian(const QuadraticHamiltonian& H, const PhasePoint& X,
                                    const Vec& P, const Gauge& g, const PhysicalParams& p);
// Max relative deviation between the two at deterministic sample points.
double roundtrip_check(const QuadraticHamiltonian& H, const Gauge& g, const PhysicalParams& p,
                       int samples = 32);

struct HamiltonianFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};
HamiltonianFunction as_function(const QuadraticHamiltonian& H);

// Steps 2-4 at one point: Q solved from omega^-1 grad H(Q) = Xdot by Newton's
// method with a finite-difference Jacobian, starting at Q0 (origin if empty).
struct PointwiseLagrangian {
  double value = 0;
  Vec Q;
  int iterations = 0;
};
PointwiseLagrangian modular_lagrangian_at(const HamiltonianFunction& H, const PhasePoint& X,
                                          const PhasePoint& Xdot, const Gauge& g,
                                          const PhysicalParams& p, Vec Q0 = {});

}  // namespace modpi
