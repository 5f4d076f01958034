#include "modpi/legendre.hpp"

#include <cmath>
#include <random>

namespace modpi {

QuadraticHamiltonian QuadraticHamiltonian::oscillator(const PhysicalParams& p) {
  return {p.omega * metric_G(p)};
}

void QuadraticHamiltonian::validate() const {
  if (M.rows() != M.cols() || M.rows() % 2 != 0 || M.rows() == 0)
    throw DimensionMismatch("M must be 2d x 2d");
  if (!M.allFinite()) throw InvalidParams("M must be finite");
  const double scale = M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-13 * std::max(1.0, scale))
    throw InvalidParams("M must be symmetric");
  const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
  const Vec ev = es.eigenvalues();
  const double big = ev.cwiseAbs().maxCoeff(), small = ev.cwiseAbs().minCoeff();
  if (!(small > 0) || big / small > 1e12) throw SingularM("M is singular or ill-conditioned");
  if (ev.minCoeff() <= 0) throw InvalidParams("M must be positive definite");
}

double ModularLagrangian::operator()(const PhasePoint& X, const PhasePoint& Xdot) const {
  const Vec v = Xdot.stacked();
  return -v.dot(connection(X, gauge, params)) + 0.5 * v.dot(kinetic * v);
}

Vec ModularLagrangian::momentum(const PhasePoint& X, const PhasePoint& Xdot) const {
  return -connection(X, gauge, params) + kinetic * Xdot.stacked();
}

namespace {

void check_dims(const QuadraticHamiltonian& H, const PhysicalParams& p) {
  H.validate();
  if (H.M.rows() != 2 * p.dims) throw DimensionMismatch("M does not match params.dims");
}

}  // namespace

ModularLagrangian modular_legendre(const QuadraticHamiltonian& H, const Gauge& g,
                                   const PhysicalParams& p) {
  p.validate();
  check_dims(H, p);
  const Mat w = omega_matrix(p.dims);
  // Q = M^-1 omega Xdot; omega(Q, Xdot) - H(Q) = Xdot^T (omega^T M^-1 omega) Xdot / 2
  const Mat R = H.M.lu().solve(w);
  Mat K = w.transpose() * R;
  K = 0.5 * (K + K.transpose()).eval();
  return {K, g, p};
}

Vec velocity_of_charge(const QuadraticHamiltonian& H, const Vec& Q) {
  const int d = static_cast<int>(Q.size()) / 2;
  return omega_matrix(d).lu().solve(H.M * Q);
}

Vec charge_of_velocity(const QuadraticHamiltonian& H, const Vec& Xdot) {
  const int d = static_cast<int>(Xdot.size()) / 2;
  return H.M.lu().solve(omega_matrix(d) * Xdot);
}

Mat euler_lagrange_matrix(const ModularLagrangian& L) {
  const int D = 2 * L.params.dims;
  // The connection is affine in X, so unit differences give D exactly.
  const Vec a0 = connection(PhasePoint(L.params.dims), L.gauge, L.params);
  Mat Dm(D, D);
  for (int b = 0; b < D; ++b) {
    Vec e = Vec::Zero(D);
    e[b] = 1.0;
    Dm.col(b) = connection(PhasePoint::unstack(e), L.gauge, L.params) - a0;
  }
  return L.kinetic.lu().solve(Dm - Dm.transpose());
}

double legendre_back(const ModularLagrangian& L, const PhasePoint& X, const Vec& P) {
  const Vec v = L.kinetic.lu().solve(P + connection(X, L.gauge, L.params));
  return P.dot(v) - L(X, PhasePoint::unstack(v));
}

double expected_modular_hamiltonian(const QuadraticHamiltonian& H, const PhasePoint& X,
                                    const Vec& P, const Gauge& g, const PhysicalParams& p) {
  const Mat w = omega_matrix(p.dims);
  const Vec u = w.lu().solve(P + connection(X, g, p));  // omega^-1 (P + A)
  // omega^-T = -omega^-1, so the two signs cancel in the quadratic form.
  return 0.5 * u.dot(H.M * u);
}

double roundtrip_check(const QuadraticHamiltonian& H, const Gauge& g, const PhysicalParams& p,
                       int samples) {
  const ModularLagrangian L = modular_legendre(H, g, p);
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const int D = 2 * p.dims;
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    Vec x(D), P(D);
    for (int i = 0; i < D; ++i) {
      x[i] = u(rng);
      P[i] = u(rng);
    }
    const PhasePoint X = PhasePoint::unstack(x);
    const double a = legendre_back(L, X, P), b = expected_modular_hamiltonian(H, X, P, g, p);
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
  }
  return worst;
}

HamiltonianFunction as_function(const QuadraticHamiltonian& H) {
  return {[H](const Vec& Q) { return H(Q); }, [H](const Vec& Q) { return H.gradient(Q); }};
}

PointwiseLagrangian modular_lagrangian_at(const HamiltonianFunction& H, const PhasePoint& X,
                                          const PhasePoint& Xdot, const Gauge& g,
                                          const PhysicalParams& p, Vec Q0) {
  require_same_dim(X, Xdot);
  const int D = 2 * X.dim();
  const Mat w = omega_matrix(X.dim());
  const Vec v = Xdot.stacked();
  Vec Q = Q0.size() == D ? Q0 : Vec::Zero(D);
  // F(Q) = grad H(Q) - omega Xdot vanishes at the solution of step 3.
  auto F = [&](const Vec& q) { return Vec(H.gradient(q) - w * v); };
  const double scale = std::max(1.0, (w * v).norm());
  PointwiseLagrangian out;
  Vec r = F(Q);
  for (int it = 0; it < 50 && r.norm() > 1e-15 * scale; ++it) {
    Mat Jm(D, D);
    for (int b = 0; b < D; ++b) {
      const double h = 1e-5 * std::max(1.0, std::abs(Q[b]));
      Vec a = Q, c = Q;
      a[b] += h;
      c[b] -= h;
      Jm.col(b) = (H.gradient(a) - H.gradient(c)) / (2 * h);
    }
    Q -= Jm.lu().solve(r);
    r = F(Q);
    out.iterations = it + 1;
  }
  if (r.norm() > 1e-10 * scale) throw SingularM("step-3 inversion did not converge");
  out.Q = Q;
  out.value = -v.dot(connection(X, g, p)) + Q.dot(w * v) - H.value(Q);
  return out;
}

}  // namespace modpi
