#include "modpi/dynamics.hpp"

#include <cmath>

namespace modpi {

void check_nonresonant(double omega_T, double tol) {
  if (!std::isfinite(omega_T)) throw InvalidParams("non-finite time interval");
  if (std::abs(std::remainder(omega_T, kPi)) < tol)
    throw ResonantTime("Omega T is a multiple of pi");
}

namespace {

PhasePoint apply(const Mat& A, const PhasePoint& X) { return PhasePoint::unstack(A * X.stacked()); }

}  // namespace

PhasePoint TrajectoryW::operator()(double t) const {
  const Mat J = Geometry::make(params).J();
  const double ph = params.omega * (t - 0.5 * (t0 + tf));
  return chi + xi * std::sin(ph) - apply(J, xi) * std::cos(ph);
}

PhasePoint TrajectoryW::velocity(double t) const {
  const Mat J = Geometry::make(params).J();
  const double w = params.omega, ph = w * (t - 0.5 * (t0 + tf));
  return xi * (w * std::cos(ph)) + apply(J, xi) * (w * std::sin(ph));
}

PhasePoint TrajectoryW::acceleration(double t) const {
  const double w = params.omega;
  return ((*this)(t) - chi) * (-w * w);
}

TrajectoryW stationary_path(const PhasePoint& X0, const PhasePoint& Xf, const PhasePoint& W,
                            double t0, double tf, const PhysicalParams& p) {
  p.validate();
  require_same_dim(X0, Xf);
  require_same_dim(X0, W);
  if (!(tf > t0)) throw InvalidParams("tf must exceed t0");
  const double half = 0.5 * p.omega * (tf - t0);
  check_nonresonant(2 * half);
  const Mat J = Geometry::make(p).J();
  const PhasePoint Y = Xf + W, D = Y - X0;
  TrajectoryW tr;
  tr.W = W;
  tr.X0 = X0;
  tr.Xf = Xf;
  tr.t0 = t0;
  tr.tf = tf;
  tr.params = p;
  tr.chi = (X0 + Y) * 0.5 + apply(J, D) * (0.5 / std::tan(half));
  tr.xi = D * (0.5 / std::sin(half));
  return tr;
}

TrajectoryW stationary_path(const PhasePoint& X0, const PhasePoint& Xf, const LatticeVector& W,
                            double t0, double tf, const PhysicalParams& p) {
  return stationary_path(X0, Xf, W.embed(), t0, tf, p);
}

double modular_lagrangian(const PhasePoint& X, const PhasePoint& Xdot, const Gauge& g,
                          const PhysicalParams& p) {
  return -Xdot.stacked().dot(connection(X, g, p)) + metric(Xdot, Xdot, p) / (2 * p.omega);
}

double onshell_action(const TrajectoryW& tr, const Gauge& g) {
  const auto& p = tr.params;
  const double h = p.hbar;
  const PhasePoint Y = tr.end(), D = Y - tr.X0;
  const double half = 0.5 * p.omega * (tr.tf - tr.t0);
  check_nonresonant(2 * half);
  return -h * g.alpha(Y, h) + h * g.alpha(tr.X0, h) - 0.5 * symplectic(tr.X0, Y) +
         0.25 / std::tan(half) * metric(D, D, p);
}

double onshell_action_quadrature(const TrajectoryW& tr, const Gauge& g, int panels, int order) {
  return action_of([&](double t) { return tr(t); }, [&](double t) { return tr.velocity(t); },
                   tr.t0, tr.tf, g, tr.params, panels, order);
}

CurrentReport noether_currents(const TrajectoryW& tr, double t) {
  const auto& p = tr.params;
  const Geometry geo = Geometry::make(p);
  const PhasePoint X = tr(t), V = tr.velocity(t);
  CurrentReport r;
  r.chi_current = X + apply(geo.J(), V) * (1.0 / p.omega);
  r.energy = metric(V, V, p) / (2 * p.omega);
  r.kappa = symplectic(X, V) / p.omega - 0.5 * metric(X, X, p);
  const int d = X.dim();
  if (d >= 2) {
    // J^{ab} = xt^[a x^b] - m xdot^[a x^b] - (1/m Omega^2) xtdot^[a xt^b], A^[a B^b] = (A^a B^b - A^b B^a)/2
    auto wedge = [](const Vec& a, const Vec& b) { return Mat(0.5 * (a * b.transpose() - b * a.transpose())); };
    r.J = wedge(X.xt, X.x) - p.mass * wedge(V.x, X.x) -
          wedge(V.xt, X.xt) / (p.mass * p.omega * p.omega);
  }
  return r;
}

double CurrentDrift::max() const { return std::max({chi, energy, J, kappa}); }

CurrentDrift current_drift(const TrajectoryW& tr, int samples) {
  const CurrentReport ref = noether_currents(tr, tr.t0);
  const double chi_scale = std::max(1.0, ref.chi_current.stacked().norm());
  CurrentDrift d;
  for (int i = 0; i <= samples; ++i) {
    const double t = tr.t0 + (tr.tf - tr.t0) * i / samples;
    const CurrentReport c = noether_currents(tr, t);
    d.chi = std::max(d.chi, (c.chi_current - ref.chi_current).stacked().norm() / chi_scale);
    d.energy = std::max(d.energy, std::abs(c.energy - ref.energy) / std::max(1.0, std::abs(ref.energy)));
    d.kappa = std::max(d.kappa, std::abs(c.kappa - ref.kappa) / std::max(1.0, std::abs(ref.kappa)));
    if (c.J.size() > 0)
      d.J = std::max(d.J, (c.J - ref.J).cwiseAbs().maxCoeff() / std::max(1.0, ref.J.cwiseAbs().maxCoeff()));
  }
  return d;
}

double principal_function(const PhasePoint& X, double t, const PhasePoint& X0, double t0,
                          const PhysicalParams& p, const Gauge& g) {
  const double half = 0.5 * p.omega * (t - t0);
  check_nonresonant(2 * half);
  const double h = p.hbar;
  const PhasePoint D = X - X0;
  return -h * g.alpha(X, h) + h * g.alpha(X0, h) - 0.5 * symplectic(X0, X) +
         0.25 / std::tan(half) * metric(D, D, p);
}

Vec principal_momentum(const PhasePoint& X, double t, const PhasePoint& X0, double t0,
                       const PhysicalParams& p, const Gauge& g) {
  const double half = 0.5 * p.omega * (t - t0);
  check_nonresonant(2 * half);
  const Geometry geo = Geometry::make(p);
  const Vec D = (X - X0).stacked();
  // d/dX of omega(X0, X) = X0^T omega X is omega^T X0
  return -p.hbar * g.grad(X, p.hbar) - 0.5 * geo.omega.transpose() * X0.stacked() +
         0.5 / std::tan(half) * geo.G * D;
}

double modular_hamiltonian(const PhasePoint& X, const Vec& P, const Gauge& g,
                           const PhysicalParams& p) {
  const Vec v = P + connection(X, g, p);
  return 0.5 * p.omega * v.dot(metric_G(p).inverse() * v);
}

HJReport hamilton_jacobi_residual(const PhasePoint& X, double t, const PhasePoint& X0, double t0,
                                  const PhysicalParams& p, const Gauge& g, double fd_step) {
  const double half = 0.5 * p.omega * (t - t0);
  check_nonresonant(2 * half);
  const PhasePoint D = X - X0;
  const double s = std::sin(half);
  const double dSdt = -0.125 * p.omega / (s * s) * metric(D, D, p);
  const Vec P = principal_momentum(X, t, X0, t0, p, g);
  HJReport r;
  r.residual = dSdt + modular_hamiltonian(X, P, g, p);
  r.energy_scale = std::max(1.0, std::abs(dSdt));

  auto S = [&](const Vec& v, double tt) {
    return principal_function(PhasePoint::unstack(v), tt, X0, t0, p, g);
  };
  const Vec x = X.stacked();
  const double h = fd_step;
  const double dSdt_fd = (S(x, t + h) - S(x, t - h)) / (2 * h);
  Vec P_fd(x.size());
  for (int k = 0; k < x.size(); ++k) {
    Vec a = x, b = x;
    a[k] += h;
    b[k] -= h;
    P_fd[k] = (S(a, t) - S(b, t)) / (2 * h);
  }
  r.residual_fd = dSdt_fd + modular_hamiltonian(X, P_fd, g, p);
  r.grad_mismatch = std::max(std::abs(dSdt_fd - dSdt), (P_fd - P).cwiseAbs().maxCoeff());
  return r;
}

namespace {

// Linear generator B of the variation dX = B X, or nothing for translation / time shift.
Mat generator(const VariationSpec& v, const PhysicalParams& p, int d) {
  Mat B = Mat::Zero(2 * d, 2 * d);
  if (v.which == Symmetry::Rotation) {
    if (v.L.rows() != d || v.L.cols() != d) throw DimensionMismatch("rotation generator must be d x d");
    B.topLeftCorner(d, d) = -v.L;
    B.bottomRightCorner(d, d) = -v.L;
  } else if (v.which == Symmetry::Symplectic) {
    B = Geometry::make(p).J();
  }
  return B;
}

// Total-derivative term F with dL = s dF/dt to first order.
double boundary_term(const VariationSpec& v, const PhasePoint& X, const PhasePoint& V,
                     const Gauge& g, const PhysicalParams& p) {
  const Vec A = connection(X, g, p);
  const int d = X.dim();
  switch (v.which) {
    case Symmetry::Translation:
      return -v.E.stacked().dot(A) + symplectic(X, v.E);
    case Symmetry::TimeShift:
      return modular_lagrangian(X, V, g, p);
    case Symmetry::Rotation:
      return A.head(d).dot(v.L * X.x) + A.tail(d).dot(v.L * X.xt) - X.xt.dot(v.L * X.x);
    case Symmetry::Symplectic:
      return -A.dot(Geometry::make(p).J() * X.stacked()) + 0.5 * metric(X, X, p);
  }
  return 0;
}

}  // namespace

VariationReport symmetry_variation_check(const TrajectoryW& tr, const VariationSpec& v,
                                         const Gauge& g) {
  const auto& p = tr.params;
  const int d = tr.X0.dim();
  if (v.which == Symmetry::Rotation && d < 2) throw UnsupportedDim("rotation needs d >= 2");
  if (v.which == Symmetry::Translation) require_same_dim(v.E, tr.X0);
  const Mat B = generator(v, p, d);
  const double S0 = onshell_action_quadrature(tr, g);
  const double F = boundary_term(v, tr(tr.tf), tr.velocity(tr.tf), g, p) -
                   boundary_term(v, tr(tr.t0), tr.velocity(tr.t0), g, p);
  const double scale = std::max(1.0, std::abs(F));

  VariationReport r;
  for (double s : {1e-3, 1e-4, 1e-5}) {
    double S1 = 0;
    if (v.which == Symmetry::TimeShift) {
      S1 = action_of([&](double t) { return tr(t + s); }, [&](double t) { return tr.velocity(t + s); },
                     tr.t0, tr.tf, g, p);
    } else if (v.which == Symmetry::Translation) {
      S1 = action_of([&](double t) { return tr(t) + v.E * s; }, [&](double t) { return tr.velocity(t); },
                     tr.t0, tr.tf, g, p);
    } else {
      const Mat I = Mat::Identity(2 * d, 2 * d);
      S1 = action_of([&](double t) { return apply(I + s * B, tr(t)); },
                     [&](double t) { return apply(I + s * B, tr.velocity(t)); }, tr.t0, tr.tf, g, p);
    }
    const double mis = std::abs((S1 - S0) - s * F) / (s * std::max(std::abs(F), scale));
    r.sizes.push_back(s);
    r.mismatch.push_back(mis);
    r.worst = std::max(r.worst, mis);
  }
  const double a = r.mismatch.front(), b = r.mismatch.back();
  if (a > 0 && b > 0) r.slope = std::log(a / b) / std::log(r.sizes.front() / r.sizes.back());
  return r;
}

}  // namespace modpi
