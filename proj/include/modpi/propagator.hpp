#pragma once
#include <vector>

#include "modpi/parallel.hpp"
#include "modpi/phasespace.hpp"
#include "modpi/theta.hpp"

namespace modpi {

// How the i-epsilon prescription enters a lattice sum.
//   Identity:    epsilon * 1 added to the theta matrix (damping exp(-pi eps |n|^2)).
//   ComplexTime: T -> T - i epsilon / Omega everywhere.
enum class Regulator { Identity, ComplexTime };

struct AmplitudeRequest {
  PhasePoint X0, Xf;
  double t0 = 0.0, tf = 1.0;
  PhysicalParams params;
  ModularLattice lattice;
  Gauge gauge;
  double epsilon = 0.125;
  ThetaTruncation trunc{1e-14, 512};
  int winding_cut = 8;
  Regulator regulator = Regulator::Identity;

  // Symmetric lattice, zero gauge, endpoints at the origin.
  static AmplitudeRequest make(const PhysicalParams& p, double T, double lattice_scale = 1.0);
  double duration() const { return tf - t0; }
  void validate() const;
};

struct SlicingPlan {
  int N = 1;
  int quadrature_order = 48;
  double budget = 2e7;  // max number of step-amplitude evaluations
};

// sqrt(m Omega / (2 pi i hbar sin Omega T)) exp{i m Omega [(x0^2 + xf^2) cos - 2 x0 xf] / (2 hbar sin)},
// square-root branch continued from T -> 0+ through the caustics. T may carry a
// negative imaginary part.
cplx mehler_kernel(double xf, double x0, cplx T, const PhysicalParams& p);

// <Xf| exp(-i T H / hbar) |X0> from the Zak double sum over Mehler kernels at complex
// time T - i epsilon / Omega; the double sum is a genus-2 theta series (d = 1).
cplx exact_amplitude(const AmplitudeRequest& req);

// Same sum split by w = n' - n, the lattice winding of the position argument.
struct SectorValue {
  int w = 0;
  cplx value;
};
std::vector<SectorValue> exact_amplitude_sectors(const AmplitudeRequest& req, int wmax);

// One time slice. X* = (x_prev, xt_next), dX = Xnext - Xprev.
cplx infinitesimal_amplitude_sum(const PhasePoint& Xnext, const PhasePoint& Xprev, double dt,
                                 const AmplitudeRequest& req);
cplx infinitesimal_amplitude_theta(const PhasePoint& Xnext, const PhasePoint& Xprev, double dt,
                                   const AmplitudeRequest& req);
// Theta factor of the inverted form, which tends to 1 as dt -> 0.
cplx infinitesimal_theta_factor(const PhasePoint& Xnext, const PhasePoint& Xprev, double dt,
                                const AmplitudeRequest& req);

// N-fold composition; every intermediate point is integrated over the cell
// centred at the previous point.
cplx compose_amplitude(const AmplitudeRequest& req, const SlicingPlan& plan,
                       Exec ex = Exec::Parallel);

// Stationary-path winding sum, up to an overall constant.
struct SemiclassicalValue {
  cplx direct;  // explicit sum over |n|, |nt| <= winding_cut
  cplx theta;   // closed theta form
};
SemiclassicalValue semiclassical_amplitude(const AmplitudeRequest& req);

// S_mod on the stationary path from X0 to Y (already including the winding) for
// complex time; real T reproduces onshell_action.
cplx onshell_action_complex(const PhasePoint& X0, const PhasePoint& Y, cplx T, const Gauge& g,
                            const PhysicalParams& p);

}  // namespace modpi
