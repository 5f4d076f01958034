#include <doctest.h>

#include "modpi/dynamics.hpp"
#include "support.hpp"

using namespace modpi;
using testsupport::Rng;

namespace {

const PhysicalParams P{};
const std::vector<Gauge> kGauges = {Gauge::zero(), Gauge::schrodinger(), Gauge::momentum()};

// X(t) = chi + a cos(Omega(t-t0)) + b sin(Omega(t-t0)) with Xdot(t0) = Omega J (X0 - chi):
// six linear conditions fix (chi, a, b) without the closed form.
PhasePoint solve_chi(const PhasePoint& X0, const PhasePoint& Y, double T, const PhysicalParams& p) {
  const Mat J = Geometry::make(p).J();
  const Mat I = Mat::Identity(2, 2);
  const double c = std::cos(p.omega * T), s = std::sin(p.omega * T);
  Mat M = Mat::Zero(6, 6);
  Vec r(6);
  M.block(0, 0, 2, 2) = I;  // X(t0)
  M.block(0, 2, 2, 2) = I;
  r.head(2) = X0.stacked();
  M.block(2, 0, 2, 2) = I;  // X(tf)
  M.block(2, 2, 2, 2) = c * I;
  M.block(2, 4, 2, 2) = s * I;
  r.segment(2, 2) = Y.stacked();
  // Omega b = Omega J (X0 - chi)  ->  b + J chi = J X0
  M.block(4, 4, 2, 2) = I;
  M.block(4, 0, 2, 2) = J;
  r.tail(2) = J * X0.stacked();
  const Vec sol = M.fullPivLu().solve(r);
  return PhasePoint::unstack(sol.head(2));
}

double dist(const PhasePoint& a, const PhasePoint& b) { return (a - b).stacked().cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("zero path") {
  const auto tr = stationary_path({0, 0}, {0, 0}, PhasePoint(1), 0.0, 1.0, P);
  CHECK(tr.chi.stacked().norm() == 0.0);
  CHECK(tr.xi.stacked().norm() == 0.0);
  CHECK(tr(0.37).stacked().norm() == 0.0);
  CHECK(onshell_action(tr, Gauge::zero()) == 0.0);
  const auto c = noether_currents(tr, 0.5);
  CHECK(c.energy == 0.0);
  CHECK(c.kappa == 0.0);
  CHECK(c.chi_current.stacked().norm() == 0.0);
}

TEST_CASE("fixture path agrees with an independent boundary-value solve") {
  const auto lat = ModularLattice::symmetric(P);
  const LatticeVector W(1, 0, lat);
  const auto tr = stationary_path({0, 0}, {0.3, -0.2}, W, 0.0, 1.0, P);
  const PhasePoint chi = solve_chi({0, 0}, tr.end(), 1.0, P);
  CHECK(dist(chi, tr.chi) < 1e-10);
  // recorded fixture
  const double lam = std::sqrt(2 * kPi);
  const double cot = 1 / std::tan(0.5);
  CHECK(std::abs(tr.chi.x[0] - (0.5 * (0.3 + lam) + 0.5 * (-0.2) * cot)) < 1e-15);
  CHECK(std::abs(tr.chi.xt[0] - (0.5 * (-0.2) - 0.5 * (0.3 + lam) * cot)) < 1e-15);
  CHECK(std::abs(tr.chi.x[0] - 1.2202653651442548) < 1e-12);
  CHECK(std::abs(tr.chi.xt[0] - -2.668749298061525) < 1e-12);
}

TEST_CASE("stationary paths: boundary values, equation of motion, midpoint and ellipse") {
  Rng r(31);
  for (int d : {1, 2}) {
    const PhysicalParams p{0.8, 1.3, 0.7, d};
    const Geometry geo = Geometry::make(p);
    for (int i = 0; i < 50; ++i) {
      PhasePoint X0(d), Xf(d), W(d);
      for (int k = 0; k < d; ++k) {
        X0.x[k] = r.uni(-1, 1);
        X0.xt[k] = r.uni(-1, 1);
        Xf.x[k] = r.uni(-1, 1);
        Xf.xt[k] = r.uni(-1, 1);
        W.x[k] = 2.0 * r.integer(-2, 2);
        W.xt[k] = 1.5 * r.integer(-2, 2);
      }
      const double t0 = r.uni(-1, 1), tf = t0 + r.uni(0.2, 4.0);
      const auto tr = stationary_path(X0, Xf, W, t0, tf, p);
      CHECK(dist(tr(t0), X0) < 1e-12);
      CHECK(dist(tr(tf), Xf + W) < 1e-12);
      double G0 = metric(tr(t0) - tr.chi, tr(t0) - tr.chi, p);
      for (int k = 0; k < 50; ++k) {
        const double t = t0 + (tf - t0) * k / 49.0;
        const Vec acc = tr.acceleration(t).stacked();
        const Vec rhs = p.omega * geo.J() * tr.velocity(t).stacked();
        CHECK((acc - rhs).norm() < 1e-10 * std::max(1.0, acc.norm()));
        // finite-difference check of the sampler's derivatives
        const double h = 1e-5;
        CHECK(dist((tr(t + h) - tr(t - h)) * (0.5 / h), tr.velocity(t)) < 1e-7 * std::max(1.0, tr.velocity(t).stacked().norm()));
        const PhasePoint mid = tr(t) + PhasePoint::unstack(geo.J() * tr.velocity(t).stacked()) * (1 / p.omega);
        CHECK(dist(mid, tr.chi) < 1e-11 * std::max(1.0, tr.chi.stacked().norm()));
        const double Gt = metric(tr(t) - tr.chi, tr(t) - tr.chi, p);
        CHECK(std::abs(Gt - G0) < 1e-10 * std::max(1.0, G0));
      }
      // winding additivity
      const auto tr2 = stationary_path(X0, Xf + W, PhasePoint(d), t0, tf, p);
      CHECK(dist(tr2(0.5 * (t0 + tf)), tr(0.5 * (t0 + tf))) < 1e-12);
    }
  }
}

TEST_CASE("resonant intervals are rejected") {
  CHECK_THROWS_AS(stationary_path({0, 0}, {1, 0}, PhasePoint(1), 0.0, 2 * kPi, P), ResonantTime);
  CHECK_THROWS_AS(stationary_path({0, 0}, {1, 0}, PhasePoint(1), 0.0, kPi + 1e-11, P), ResonantTime);
  CHECK_NOTHROW(stationary_path({0, 0}, {1, 0}, PhasePoint(1), 0.0, kPi + 1e-6, P));
  CHECK_THROWS_AS(hamilton_jacobi_residual({1, 0}, 2 * kPi, {0, 0}, 0.0, P, Gauge::zero()), ResonantTime);
}

TEST_CASE("on-shell action: closed form against quadrature, gauge shift, winding terms") {
  Rng r(32);
  const PhysicalParams p{0.9, 1.1, 1.3, 1};
  const auto lat = ModularLattice::from_lambda(1.7, p);
  for (int i = 0; i < 50; ++i) {
    const PhasePoint X0 = r.point(1.0), Xf = r.point(1.0);
    const LatticeVector W(r.integer(-2, 2), r.integer(-2, 2), lat);
    const double T = r.uni(0.2, 2.2);
    const auto tr = stationary_path(X0, Xf, W, 0.0, T, p);
    for (const auto& g : kGauges) {
      const double a = onshell_action(tr, g), b = onshell_action_quadrature(tr, g);
      CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)));
    }
    const double shift = onshell_action(tr, Gauge::schrodinger()) - onshell_action(tr, Gauge::zero());
    const double h = p.hbar;
    CHECK(std::abs(shift - (-h * Gauge::schrodinger().alpha(tr.end(), h) +
                            h * Gauge::schrodinger().alpha(X0, h))) < 1e-12);
    // W-dependence: quadrature difference against the explicit W terms
    const auto tr0 = stationary_path(X0, Xf, PhasePoint(1), 0.0, T, p);
    const PhasePoint w = W.embed(), D = Xf - X0;
    const double c = 1 / std::tan(0.5 * p.omega * T);
    const double explicit_w = -0.5 * symplectic(X0, w) + 0.25 * c * (2 * metric(D, w, p) + metric(w, w, p));
    const double dq = onshell_action_quadrature(tr, Gauge::zero()) - onshell_action_quadrature(tr0, Gauge::zero());
    CHECK(std::abs(dq - explicit_w) < 1e-9 * std::max(1.0, std::abs(explicit_w)));
  }
}

TEST_CASE("Noether currents are conserved") {
  Rng r(33);
  for (int d : {1, 2}) {
    const PhysicalParams p{0.7, 1.4, 0.9, d};
    for (int i = 0; i < 50; ++i) {
      PhasePoint X0(d), Xf(d);
      for (int k = 0; k < d; ++k) {
        X0.x[k] = r.uni(-2, 2);
        X0.xt[k] = r.uni(-2, 2);
        Xf.x[k] = r.uni(-2, 2);
        Xf.xt[k] = r.uni(-2, 2);
      }
      const auto tr = stationary_path(X0, Xf, PhasePoint(d), 0.0, r.uni(0.3, 3.0), p);
      const CurrentDrift dr = current_drift(tr);
      CHECK(dr.max() < 1e-10);
      const auto c = noether_currents(tr, 0.1);
      CHECK(std::abs(c.kappa - (c.energy / p.omega - 0.5 * metric(tr.chi, tr.chi, p))) < 1e-10);
      CHECK(c.J.size() == (d == 1 ? 0 : 4));
      if (d == 2) CHECK((c.J + c.J.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("Hamilton's equations recover the usual energy and angular momentum") {
  Rng r(34);
  const PhysicalParams p{1.0, 1.6, 0.8, 2};
  for (int i = 0; i < 20; ++i) {
    PhasePoint X0(2);
    X0.x << r.uni(-1, 1), r.uni(-1, 1);
    X0.xt << r.uni(-1, 1), r.uni(-1, 1);
    const double T = r.uni(0.3, 2.5), w = p.omega, m = p.mass;
    PhasePoint Y(2);
    Y.x = X0.x * std::cos(w * T) + X0.xt * std::sin(w * T) / (m * w);
    Y.xt = X0.xt * std::cos(w * T) - X0.x * (m * w * std::sin(w * T));
    const auto tr = stationary_path(X0, Y, PhasePoint(2), 0.0, T, p);
    CHECK(tr.chi.stacked().norm() < 1e-12);
    const double t = r.uni(0, T);
    const auto c = noether_currents(tr, t);
    const PhasePoint X = tr(t), V = tr.velocity(t);
    const double E = 0.5 * m * V.x.squaredNorm() + 0.5 * m * w * w * X.x.squaredNorm();
    CHECK(std::abs(c.energy - E) < 1e-10);
    const Mat Jstd = 0.5 * (X.x * X.xt.transpose() - X.xt * X.x.transpose());
    CHECK((c.J - Jstd).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("Hamilton-Jacobi equation") {
  Rng r(35);
  const PhysicalParams p{0.8, 1.2, 1.1, 1};
  for (const auto& g : kGauges) {
    for (int i = 0; i < 100; ++i) {
      const PhasePoint X = r.point(2.0), X0 = r.point(2.0);
      const double t = r.uni(0.2, 2.5);
      const HJReport h = hamilton_jacobi_residual(X, t, X0, 0.0, p, g);
      CHECK(std::abs(h.residual) < 1e-8 * h.energy_scale);
      CHECK(std::abs(h.residual_fd) < 1e-5 * h.energy_scale);
      CHECK(h.grad_mismatch < 1e-6 * h.energy_scale);
    }
    // momentum from S matches -A + G Xdot / Omega along a stationary path
    const PhasePoint X0 = r.point(1.0), Xf = r.point(1.0);
    const auto tr = stationary_path(X0, Xf, PhasePoint(1), 0.0, 1.7, p);
    for (double t : {0.3, 0.9, 1.7}) {
      const Vec P1 = principal_momentum(tr(t), t, X0, 0.0, p, g);
      const Vec P2 = -connection(tr(t), g, p) + metric_G(p) * tr.velocity(t).stacked() / p.omega;
      CHECK((P1 - P2).norm() < 1e-8);
    }
  }
}

TEST_CASE("symmetry variations change the action by boundary terms") {
  Rng r(36);
  const PhysicalParams p{0.9, 1.2, 1.1, 1};
  const auto tr = stationary_path({0.2, -0.4}, {0.7, 0.3}, PhasePoint(0.5, -1.0), 0.0, 1.3, p);
  for (const auto& g : kGauges) {
    VariationSpec v;
    v.E = PhasePoint(1);
    CHECK(symmetry_variation_check(tr, v, g).worst == 0.0);
    v.E = PhasePoint(0.4, -0.7);
    CHECK(symmetry_variation_check(tr, v, g).worst < 1e-6);
    v.which = Symmetry::TimeShift;
    const auto ts = symmetry_variation_check(tr, v, g);
    CHECK(ts.worst < 1e-2);
    CHECK(std::abs(ts.slope - 1.0) < 0.1);
    v.which = Symmetry::Symplectic;
    const auto sp = symmetry_variation_check(tr, v, g);
    CHECK(sp.worst < 1e-2);
    CHECK(std::abs(sp.slope - 1.0) < 0.1);
    v.which = Symmetry::Rotation;
    CHECK_THROWS_AS(symmetry_variation_check(tr, v, g), UnsupportedDim);
  }
  // kappa from the symplectic variation
  const auto c = noether_currents(tr, 0.4);
  const PhasePoint X = tr(0.4), V = tr.velocity(0.4);
  CHECK(std::abs(c.kappa - (symplectic(X, V) / p.omega - 0.5 * metric(X, X, p))) < 1e-10);

  const PhysicalParams p2{0.9, 1.2, 1.1, 2};
  PhasePoint A(2), B(2);
  A.x << 0.1, -0.3;
  A.xt << 0.5, 0.2;
  B.x << -0.4, 0.6;
  B.xt << 0.3, -0.1;
  const auto tr2 = stationary_path(A, B, PhasePoint(2), 0.0, 1.1, p2);
  VariationSpec rot;
  rot.which = Symmetry::Rotation;
  rot.L = Mat::Zero(2, 2);
  rot.L(0, 1) = 1;
  rot.L(1, 0) = -1;
  for (const auto& g : kGauges) {
    const auto rr = symmetry_variation_check(tr2, rot, g);
    CHECK(rr.worst < 1e-2);
    CHECK(std::abs(rr.slope - 1.0) < 0.1);
  }
}
