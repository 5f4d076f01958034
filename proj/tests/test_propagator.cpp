#include <doctest.h>

#include "modpi/dynamics.hpp"
#include "modpi/propagator.hpp"
#include "modpi/quadrature.hpp"
#include "modpi/zak.hpp"
#include "support.hpp"

using namespace modpi;
using testsupport::rel;
using testsupport::Rng;

namespace {

const PhysicalParams P{};
const std::vector<Gauge> kGauges = {Gauge::zero(), Gauge::schrodinger(), Gauge::momentum()};

AmplitudeRequest request(double T, const PhasePoint& Xf, const PhasePoint& X0,
                         const PhysicalParams& p = P) {
  AmplitudeRequest r = AmplitudeRequest::make(p, T);
  r.Xf = Xf;
  r.X0 = X0;
  return r;
}

// Plain double sum over Mehler kernels, no theta rewriting.
cplx exact_brute(const AmplitudeRequest& req, int R) {
  const auto& p = req.params;
  const double h = p.hbar, lam = req.lattice.lambda[0], lt = req.lattice.lambda_tilde[0];
  const double x0 = req.X0.x[0], xt0 = req.X0.xt[0], xf = req.Xf.x[0], xtf = req.Xf.xt[0];
  const cplx T(req.duration(), -req.epsilon / p.omega);
  cplx s = 0;
  for (int n = -R; n <= R; ++n)
    for (int m = -R; m <= R; ++m)
      s += std::exp(kI * (-xtf * lam * m + xt0 * lam * n) / h) *
           mehler_kernel(xf + lam * m, x0 + lam * n, T, p);
  const auto& g = req.gauge;
  return s / lt *
         std::exp(kI * (-g.alpha(req.Xf, h) + g.alpha(req.X0, h) - 0.5 * xf * xtf / h + 0.5 * x0 * xt0 / h));
}

}  // namespace

TEST_CASE("Mehler kernel: modulus, caustics and the group law at complex time") {
  const PhysicalParams p{0.8, 1.3, 0.9, 1};
  for (double T : {0.3, 2.0, 4.0, 7.5}) {
    const double s = std::abs(std::sin(p.omega * T));
    CHECK(std::abs(std::abs(mehler_kernel(0.4, -0.2, T, p)) - std::sqrt(p.mw() / (2 * kPi * p.hbar * s))) < 1e-12);
  }
  CHECK_THROWS_AS(mehler_kernel(0.0, 0.0, kPi / p.omega, p), CausticError);
  // Composition across the first caustic fixes the square-root branch.
  const QuadRule q = gauss_legendre(40, -30, 30, 60);
  for (auto [T1, T2] : {std::pair{0.7, 0.9}, {2.1, 1.8}, {3.0, 3.3}}) {
    const cplx t1(T1, -0.3), t2(T2, -0.25);
    for (auto [x, x0] : {std::pair{0.3, -0.5}, {-1.1, 0.2}}) {
      cplx s = 0;
      for (int i = 0; i < q.size(); ++i)
        s += q.w[i] * mehler_kernel(x, q.x[i], t1, p) * mehler_kernel(q.x[i], x0, t2, p);
      CHECK(rel(s, mehler_kernel(x, x0, t1 + t2, p)) < 1e-7);
    }
  }
  // Real-time kernel is the limit of the complex one.
  CHECK(rel(mehler_kernel(0.3, 0.1, cplx(2.0, -1e-9), p), mehler_kernel(0.3, 0.1, 2.0, p)) < 1e-7);
}

TEST_CASE("exact amplitude equals the plain double sum") {
  Rng r(21);
  for (const auto& g : kGauges) {
    for (int i = 0; i < 10; ++i) {
      auto req = request(r.uni(0.2, 5.0), r.point(2.0), r.point(2.0));
      req.gauge = g;
      CHECK(rel(exact_amplitude(req), exact_brute(req, 60)) < 1e-10);
    }
  }
  const PhysicalParams p{0.6, 1.7, 1.4, 1};
  auto req = request(1.3, {0.2, -0.4}, {0.9, 0.3}, p);
  req.lattice = ModularLattice::from_lambda(1.7, p);
  CHECK(rel(exact_amplitude(req), exact_brute(req, 80)) < 1e-10);
}

TEST_CASE("exact amplitude: quasi-periodicity, gauge covariance, time reversal") {
  Rng r(22);
  for (const auto& g : kGauges) {
    for (int i = 0; i < 10; ++i) {
      const double T = r.uni(0.2, 3.0);
      auto req = request(T, r.point(1.5), r.point(1.5));
      req.gauge = g;
      const cplx A = exact_amplitude(req);
      const LatticeVector K(r.integer(-2, 2), r.integer(-2, 2), req.lattice);
      auto shifted = req;
      shifted.Xf = req.Xf + K.embed();
      CHECK(rel(exact_amplitude(shifted), std::exp(-kI * beta_phase(req.Xf, K, g, P)) * A) < 1e-10);
      shifted = req;
      shifted.X0 = req.X0 + K.embed();
      CHECK(rel(exact_amplitude(shifted), std::exp(kI * beta_phase(req.X0, K, g, P)) * A) < 1e-10);
      // time reversal swaps the endpoints and flips xt
      auto rev = req;
      rev.Xf = PhasePoint(req.X0.x, -req.X0.xt);
      rev.X0 = PhasePoint(req.Xf.x, -req.Xf.xt);
      CHECK(rel(exact_amplitude(rev), A) < 1e-10);
    }
  }
  auto req = request(0.9, {0.3, 0.8}, {-0.6, 0.1});
  const cplx A0 = exact_amplitude(req);
  for (const auto& g : {Gauge::schrodinger(), Gauge::custom(0.37)}) {
    auto rg = req;
    rg.gauge = g;
    const double ph = -g.alpha(req.Xf, 1.0) + g.alpha(req.X0, 1.0);
    CHECK(rel(exact_amplitude(rg), std::exp(kI * ph) * A0) < 1e-12);
  }
}

TEST_CASE("exact amplitude sectors add up and the amplitude composes") {
  Rng r(23);
  for (int i = 0; i < 6; ++i) {
    auto req = request(r.uni(0.3, 2.5), r.point(1.5), r.point(1.5));
    cplx s = 0;
    for (const auto& sv : exact_amplitude_sectors(req, 30)) s += sv.value;
    CHECK(rel(s, exact_amplitude(req)) < 1e-10);
  }
  // Group law over one cell: the Zak kernel composes like any kernel.
  const auto lat = ModularLattice::symmetric(P);
  const double h = 0.5 * lat.lambda[0], ht = 0.5 * lat.lambda_tilde[0];
  const QuadRule qx = gauss_legendre(24, -h, h, 2), qp = gauss_legendre(24, -ht, ht, 2);
  auto a = request(0.4, {0.2, -0.3}, {0, 0}), b = request(0.7, {0, 0}, {-0.4, 0.5});
  cplx s = 0;
  for (int i = 0; i < qx.size(); ++i)
    for (int j = 0; j < qp.size(); ++j) {
      const PhasePoint Y(qx.x[i], qp.x[j]);
      a.X0 = Y;
      b.Xf = Y;
      s += qx.w[i] * qp.w[j] * exact_amplitude(a) * exact_amplitude(b);
    }
  auto ab = request(1.1, a.Xf, b.X0);
  ab.epsilon = a.epsilon + b.epsilon;
  CHECK(rel(s, exact_amplitude(ab)) < 1e-8);
}

TEST_CASE("exact amplitude errors") {
  auto req = request(1.0, {0, 0}, {0, 0});
  req.epsilon = 0;
  CHECK_THROWS_AS(exact_amplitude(req), InvalidParams);
  req = request(1.0, {0, 0}, {0, 0});
  req.epsilon = 1e-6;
  req.trunc.max_radius = 8;
  CHECK_THROWS_AS(exact_amplitude(req), TailTooLarge);
  req = request(1.0, {0, 0}, {0, 0}, PhysicalParams{1, 1, 1, 2});
  req.X0 = PhasePoint(1);
  CHECK_THROWS_AS(exact_amplitude(req), DimensionMismatch);
}

TEST_CASE("short-time amplitude: direct lattice sum equals the inverted theta form") {
  Rng r(24);
  for (const auto& g : kGauges) {
    for (int i = 0; i < 100; ++i) {
      auto req = request(1.0, {0, 0}, {0, 0});
      req.gauge = g;
      req.epsilon = r.uni(0.02, 0.3);
      const double dt = r.uni(0.005, 0.5);
      const PhasePoint Xp = r.point(2.0), Xn = Xp + r.point(0.6);
      const cplx a = infinitesimal_amplitude_sum(Xn, Xp, dt, req);
      const cplx b = infinitesimal_amplitude_theta(Xn, Xp, dt, req);
      CHECK(std::abs(a - b) < 1e-9 * std::max(1.0, std::abs(a)));
    }
  }
  // d = 2 with an anisotropic lattice
  const PhysicalParams p2{0.9, 1.2, 0.7, 2};
  AmplitudeRequest req = AmplitudeRequest::make(p2, 1.0);
  Vec lam(2);
  lam << 1.4, 2.3;
  req.lattice = ModularLattice::from_lambda(lam, p2);
  req.epsilon = 0.2;
  for (int i = 0; i < 5; ++i) {
    PhasePoint Xp(2), Xn(2);
    for (int k = 0; k < 2; ++k) {
      Xp.x[k] = r.uni(-1, 1);
      Xp.xt[k] = r.uni(-1, 1);
      Xn.x[k] = Xp.x[k] + r.uni(-0.3, 0.3);
      Xn.xt[k] = Xp.xt[k] + r.uni(-0.3, 0.3);
    }
    const cplx a = infinitesimal_amplitude_sum(Xn, Xp, 0.05, req);
    CHECK(std::abs(a - infinitesimal_amplitude_theta(Xn, Xp, 0.05, req)) < 1e-9 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("short-time amplitude: theta factor tends to one, coincident points") {
  auto req = request(1.0, {0, 0}, {0, 0});
  const PhasePoint Xp(0.4, -0.3), dX(0.01, 0.02);
  double prev = 1e300;
  for (double dt : {0.04, 0.02, 0.01}) {
    req.epsilon = 2 * dt;
    const double dev = std::abs(infinitesimal_theta_factor(Xp + dX, Xp, dt, req) - 1.0);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(prev < 1e-9);
  // At X* = 0, dX = 0 the sum is a product of two plain theta series.
  req.epsilon = 0.1;
  const double dt = 0.01, lam = req.lattice.lambda[0], lt = req.lattice.lambda_tilde[0];
  const ThetaTruncation wide{1e-15, 4096};
  const cplx prod = theta1(0.0, cplx(-dt * lam * lam / (2 * kPi), 0.1), wide) *
                    theta1(0.0, cplx(-dt * lt * lt / (2 * kPi), 0.1), wide) / (2 * kPi);
  CHECK(rel(infinitesimal_amplitude_theta({0, 0}, {0, 0}, dt, req), prod) < 1e-11);
  req.regulator = Regulator::ComplexTime;
  CHECK_THROWS_AS(infinitesimal_amplitude_theta(Xp, Xp, 0.01, req), InvalidParams);
}

TEST_CASE("composition: one slice is the step amplitude, serial equals parallel") {
  auto req = request(0.3, {0.2, -0.1}, {-0.1, 0.3});
  SlicingPlan plan;
  plan.N = 1;
  CHECK(compose_amplitude(req, plan) == infinitesimal_amplitude_theta(req.Xf, req.X0, 0.3, req));
  plan.N = 2;
  plan.quadrature_order = 8;
  const cplx s = compose_amplitude(req, plan, Exec::Serial);
  CHECK(std::abs(compose_amplitude(req, plan, Exec::Parallel) - s) < 1e-12 * std::abs(s));
  plan.N = 4;
  plan.quadrature_order = 48;
  CHECK_THROWS_AS(compose_amplitude(req, plan), BudgetExceeded);
}

TEST_CASE("semiclassical sum: direct equals theta, cut converges, ratio to exact is constant") {
  Rng r(25);
  for (const auto& g : kGauges) {
    for (int i = 0; i < 8; ++i) {
      auto req = request(r.uni(0.3, 5.5), r.point(1.5), r.point(1.5));
      req.gauge = g;
      const auto v = semiclassical_amplitude(req);
      CHECK(std::abs(v.direct - v.theta) < 1e-9 * std::max(1.0, std::abs(v.theta)));
      req.winding_cut = 16;
      CHECK(std::abs(semiclassical_amplitude(req).direct - v.direct) < 1e-10 * std::max(1.0, std::abs(v.theta)));
    }
  }
  // Matched regulators: the winding sum is proportional to the exact amplitude.
  for (double T : {0.5, 1.7, 4.0}) {
    auto ref = request(T, {0.1, 0.2}, {-0.3, 0.4});
    ref.regulator = Regulator::ComplexTime;
    const cplx k0 = semiclassical_amplitude(ref).theta / exact_amplitude(ref);
    for (int i = 0; i < 6; ++i) {
      auto req = ref;
      req.Xf = r.point(2.0);
      req.X0 = r.point(2.0);
      const cplx k = semiclassical_amplitude(req).theta / exact_amplitude(req);
      CHECK(rel(k, k0) < 1e-9);
    }
  }
  auto res = request(2 * kPi, {0, 0}, {0, 0});
  CHECK_THROWS_AS(semiclassical_amplitude(res), ResonantTime);
}

TEST_CASE("complex-time action reduces to the real on-shell action") {
  Rng r(26);
  for (const auto& g : kGauges) {
    const PhasePoint X0 = r.point(1), Xf = r.point(1);
    const double T = r.uni(0.2, 2.5);
    const auto tr = stationary_path(X0, Xf, PhasePoint(0.5, -1.0), 0, T, P);
    CHECK(std::abs(onshell_action_complex(X0, tr.end(), T, g, P) - onshell_action(tr, g)) < 1e-12);
  }
}

TEST_CASE("Mehler kernel preserves the norm of a Gaussian") {
  const PhysicalParams p{0.8, 1.3, 0.9, 1};
  const auto psi = SchrodingerWavefunction::gaussian(0.4, 0.3, 0.7, p.hbar);
  const QuadRule q = gauss_legendre(40, -12, 12, 40);
  for (double T : {0.4, 1.9, 5.0}) {
    std::vector<cplx> out(q.size());
    double norm = 0;
    for (int i = 0; i < q.size(); ++i) {
      cplx s = 0;
      for (int j = 0; j < q.size(); ++j) s += q.w[j] * mehler_kernel(q.x[i], q.x[j], T, p) * psi(q.x[j]);
      norm += q.w[i] * std::norm(s);
    }
    CHECK(std::abs(norm - 1.0) < 1e-8);
  }
}
