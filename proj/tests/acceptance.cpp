// Acceptance run: one PASS/FAIL line per criterion, with the measured figure
// and the wall time against its budget. Exit status is the number of failures.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "modpi/dynamics.hpp"
#include "modpi/legendre.hpp"
#include "modpi/smeared.hpp"

using namespace modpi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Rng {
  std::mt19937_64 g;
  explicit Rng(unsigned long long s) : g(s) {}
  double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(g); }
  PhasePoint point(double s) { return {uni(-s, s), uni(-s, s)}; }
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }
double dist(const PhasePoint& a, const PhasePoint& b) { return (a - b).stacked().cwiseAbs().maxCoeff(); }

const PhysicalParams P{};
const std::vector<Gauge> kGauges = {Gauge::zero(), Gauge::schrodinger(), Gauge::momentum()};
const cplx kZ0(-0.1, 0.25), kZf(0.3, 0.2);

// 1. theta identities
Outcome theta_suite() {
  double worst = 0;
  int n = 0;
  for (int D : {1, 2})
    for (const auto& r : lemma_sweep(D, 200, 1000 + D)) {
      for (double v : r.residual) worst = std::max(worst, v);
      ++n;
    }
  return {worst < 1e-10 && n == 400, fmt("lemmas 1-6 at %d points (D=1,2), max residual %.2e < 1e-10", n, worst)};
}

// 2. compact sum against the inverted theta form
Outcome dual_path() {
  Rng r(2);
  double worst = 0;
  int n = 0;
  for (const auto& g : kGauges)
    for (int i = 0; i < 100; ++i) {
      AmplitudeRequest req = AmplitudeRequest::make(P, 1.0);
      req.gauge = g;
      const double dt = std::exp(r.uni(std::log(1e-3), std::log(1e-1)));
      const PhasePoint Xp = r.point(2.0), Xn = Xp + r.point(0.6) * std::sqrt(dt / 0.1);
      const cplx a = infinitesimal_amplitude_sum(Xn, Xp, dt, req);
      const cplx b = infinitesimal_amplitude_theta(Xn, Xp, dt, req);
      worst = std::max(worst, rel(a, b));
      ++n;
    }
  return {worst < 1e-9, fmt("%d triples x 3 gauges, dt in [1e-3, 1e-1], max relative difference %.2e < 1e-9", n / 3, worst)};
}

// 3. smeared one-step amplitude against the closed-form evolution
Outcome one_step_order() {
  const auto req = AmplitudeRequest::make(P, 1.0);
  const GaussianState gf = GaussianState::coherent(kZf, P), g0 = GaussianState::coherent(kZ0, P);
  std::vector<double> dts, err;
  for (int k : {64, 128, 256, 512}) {
    const double dt = 1.0 / k;
    const auto v = smeared_one_step(req, gf.wavefunction(), g0.wavefunction(), dt);
    dts.push_back(dt);
    err.push_back(std::abs(v.extrapolated - smeared_oracle(gf, g0, dt, P)));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = dts.size();
  bool local = true;
  std::string steps;
  for (size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log(dts[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    if (i > 0) {
      const double s = std::log(err[i - 1] / err[i]) / std::log(dts[i - 1] / dts[i]);
      local = local && std::abs(s - 2.0) <= 0.2;
      steps += fmt("%s%.2f", i > 1 ? "," : "", s);
    }
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {std::abs(slope - 2.0) <= 0.2 && local,
          fmt("errors %.2e..%.2e over dt = T/64..T/512, fitted slope %.3f (steps %s), target 2.0 +- 0.2",
              err.front(), err.back(), slope, steps.c_str())};
}

// 4. quasi-periodicity and gauge covariance of the exact amplitude
Outcome appendix_b() {
  Rng r(4);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    AmplitudeRequest req = AmplitudeRequest::make(P, r.uni(0.2, 3.0));
    req.Xf = r.point(1.5);
    req.X0 = r.point(1.5);
    req.gauge = kGauges[i % 3];
    const cplx A = exact_amplitude(req);
    const LatticeVector K(r.integer(-2, 2), r.integer(-2, 2), req.lattice);
    auto s = req;
    s.Xf = req.Xf + K.embed();
    worst = std::max(worst, rel(exact_amplitude(s), std::exp(-kI * beta_phase(req.Xf, K, req.gauge, P)) * A));
    s = req;
    s.X0 = req.X0 + K.embed();
    worst = std::max(worst, rel(exact_amplitude(s), std::exp(kI * beta_phase(req.X0, K, req.gauge, P)) * A));
    const Gauge other = Gauge::custom(r.uni(-1, 1));
    auto zero = req;
    zero.gauge = Gauge::zero();
    s = req;
    s.gauge = other;
    const double ph = -other.alpha(req.Xf, P.hbar) + other.alpha(req.X0, P.hbar);
    worst = std::max(worst, rel(exact_amplitude(s), std::exp(kI * ph) * exact_amplitude(zero)));
  }
  return {worst < 1e-9, fmt("50 cases, both quasi-periodicity phases and gauge covariance, max relative error %.2e < 1e-9", worst)};
}

// 5. stationary paths
Outcome stationary_suite() {
  Rng r(5);
  const PhysicalParams p{0.9, 1.1, 1.3, 1};
  const Geometry geo = Geometry::make(p);
  const auto lat = ModularLattice::from_lambda(1.7, p);
  double bc = 0, eom = 0, act = 0, drift = 0, kap = 0, hj = 0;
  for (int i = 0; i < 50; ++i) {
    const PhasePoint X0 = r.point(1.0), Xf = r.point(1.0);
    const LatticeVector W(r.integer(-2, 2), r.integer(-2, 2), lat);
    const double T = r.uni(0.2, 2.2);
    const auto tr = stationary_path(X0, Xf, W, 0.0, T, p);
    bc = std::max({bc, dist(tr(0.0), X0), dist(tr(T), tr.end())});
    for (int k = 0; k <= 20; ++k) {
      const double t = T * k / 20;
      const Vec a = tr.acceleration(t).stacked(), rhs = p.omega * geo.J() * tr.velocity(t).stacked();
      eom = std::max(eom, (a - rhs).norm() / std::max(1.0, a.norm()));
    }
    const Gauge& g = kGauges[i % 3];
    const double s1 = onshell_action(tr, g), s2 = onshell_action_quadrature(tr, g);
    act = std::max(act, std::abs(s1 - s2) / std::max(1.0, std::abs(s1)));
    drift = std::max(drift, current_drift(tr).max());
    const auto c = noether_currents(tr, 0.3 * T);
    kap = std::max(kap, std::abs(c.kappa - (c.energy / p.omega - 0.5 * metric(tr.chi, tr.chi, p))));
    const HJReport h = hamilton_jacobi_residual(tr(0.7 * T), 0.7 * T, X0, 0.0, p, g);
    hj = std::max(hj, std::abs(h.residual) / h.energy_scale);
  }
  const bool ok = bc < 1e-12 && eom < 1e-10 && act < 1e-8 && drift < 1e-10 && kap < 1e-10 && hj < 1e-8;
  return {ok, fmt("50 cases: boundary %.1e, EOM %.1e, action %.1e, current drift %.1e, kappa %.1e, HJ %.1e", bc,
                  eom, act, drift, kap, hj)};
}

// 6. semiclassical winding sum
Outcome semiclassical() {
  Rng r(6);
  double dual = 0;
  for (const auto& g : kGauges)
    for (int i = 0; i < 10; ++i) {
      AmplitudeRequest req = AmplitudeRequest::make(P, r.uni(0.3, 5.5));
      req.Xf = r.point(1.5);
      req.X0 = r.point(1.5);
      req.gauge = g;
      const auto v = semiclassical_amplitude(req);
      dual = std::max(dual, std::abs(v.direct - v.theta) / std::max(1.0, std::abs(v.theta)));
    }
  // Ratio of two endpoint pairs against the exact ratio, regulators matched.
  // Errors below the rounding floor count as converged.
  const double floor = 1e-12;
  std::vector<double> errs;
  bool monotone = true;
  for (double h : {1.0, 0.25, 1.0 / 16}) {
    const PhysicalParams ph{h, 1, 1, 1};
    double e = 0;
    for (double T : {0.5, 1.7, 4.0}) {
      AmplitudeRequest a = AmplitudeRequest::make(ph, T);
      a.regulator = Regulator::ComplexTime;
      a.X0 = PhasePoint(-0.3, 0.4);
      a.Xf = PhasePoint(0.1, 0.2);
      auto b = a;
      b.X0 = PhasePoint(0.25, -0.1);
      b.Xf = PhasePoint(-0.2, 0.35);
      const cplx rs = semiclassical_amplitude(a).theta / semiclassical_amplitude(b).theta;
      const cplx re = exact_amplitude(a) / exact_amplitude(b);
      e = std::max(e, std::abs(rs / re - 1.0));
    }
    if (!errs.empty()) monotone = monotone && std::max(e, floor) <= std::max(errs.back(), floor);
    errs.push_back(e);
  }
  const bool ok = dual < 1e-9 && monotone && errs.back() < 1e-9;
  return {ok, fmt("direct vs theta %.1e < 1e-9; ratio error at hbar 1, 1/4, 1/16: %.1e, %.1e, %.1e (non-increasing above %.0e)",
                  dual, errs[0], errs[1], errs[2], floor)};
}

// 7. modular Legendre transform
Outcome legendre() {
  Rng r(7);
  const PhysicalParams p{0.8, 1.4, 1.7, 1};
  const auto H = QuadraticHamiltonian::oscillator(p);
  double kin = 0, lag = 0, sch = 0, rt = 0;
  for (const auto& g : kGauges) {
    const auto L = modular_legendre(H, g, p);
    kin = std::max(kin, (L.kinetic - metric_G(p) / p.omega).cwiseAbs().maxCoeff());
    for (int i = 0; i < 20; ++i) {
      const PhasePoint X = r.point(2), V = r.point(2);
      lag = std::max(lag, std::abs(L(X, V) - modular_lagrangian(X, V, g, p)));
    }
    rt = std::max(rt, roundtrip_check(H, g, p));
  }
  const auto L = modular_legendre(H, Gauge::schrodinger(), p);
  for (int i = 0; i < 50; ++i) {
    const PhasePoint X = r.point(2), V = r.point(2);
    const double x = X.x[0], xd = V.x[0], ptd = V.xt[0];
    const double ref = x * ptd + 0.5 * p.mass * xd * xd + ptd * ptd / (2 * p.mass * p.omega * p.omega);
    sch = std::max(sch, std::abs(L(X, V) - ref));
  }
  const bool ok = kin < 1e-12 && lag < 1e-12 && sch < 1e-12 && rt < 1e-12;
  return {ok, fmt("|Kin - G/Omega| %.1e, Lagrangian %.1e, Schrodinger integrand %.1e, round trip %.1e (all < 1e-12)",
                  kin, lag, sch, rt)};
}

// 8. Schrodinger limit
Outcome limit() {
  const GaussianState g0 = GaussianState::coherent(kZ0, P), gf = GaussianState::coherent(kZf, P);
  const auto scan = schrodinger_limit_scan(g0, gf, 1.0, {2, 4, 8, 16}, P);
  bool offsector_decay = true;
  for (size_t i = 1; i < scan.rows.size(); ++i)
    offsector_decay = offsector_decay && scan.rows[i].offsector < scan.rows[i - 1].offsector;
  const auto& last = scan.rows.back();
  const bool ok = scan.fit_c > 0 && offsector_decay && scan.share_monotone && last.share > 1 - 1e-12 &&
                  scan.w0_diff_decreasing && scan.zak_decreasing;
  return {ok, fmt("lambda 2..16: fit c = %.3f > 0, w=0 share %.3f -> %.15f, Zak error %.1e -> %.1e, monotone %s",
                  scan.fit_c, scan.rows.front().share, last.share, scan.rows.front().zak_error, last.zak_error,
                  scan.share_monotone && scan.zak_decreasing && scan.w0_diff_decreasing ? "yes" : "no")};
}

// 9. composition
Outcome composition() {
  const auto req = AmplitudeRequest::make(P, 0.2);
  const GaussianState gf = GaussianState::coherent(kZf, P), g0 = GaussianState::coherent(kZ0, P);
  const auto wf = gf.wavefunction(), w0 = g0.wavefunction();
  const cplx o = smeared_oracle(gf, g0, 0.2, P);
  ComposeOptions opt;
  opt.order = 32;
  const double e2 = rel(smeared_compose_ladder(req, wf, w0, 2, opt).extrapolated, o);
  const double e4 = rel(smeared_compose_ladder(req, wf, w0, 4, opt).extrapolated, o);
  const double q = rel(smeared_compose(req, wf, w0, 2, 1.0, 24, 14), smeared_compose(req, wf, w0, 2, 1.0, 48, 14));
  const bool ok = e2 < 5e-2 && e4 < e2 && q < 1e-6;
  return {ok, fmt("T = 0.2: N=2 error %.2e < 5e-2, N=4 error %.2e (improves), order 24 vs 48 %.1e < 1e-6", e2, e4, q)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {"theta identity suite", 10, theta_suite},
      {"dual-path step kernel", 30, dual_path},
      {"one-step oracle order", 120, one_step_order},
      {"quasi-periodicity and gauge covariance", 60, appendix_b},
      {"stationary-path suite", 30, stationary_suite},
      {"semiclassical dual path and ratio test", 120, semiclassical},
      {"modular Legendre transform", 1e9, legendre},
      {"Schrodinger limit ladder", 120, limit},
      {"composition against the oracle", 300, composition},
  };
  int failures = 0;
  for (size_t i = 0; i < all.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < all[i].budget;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::string budget = all[i].budget < 1e8 ? fmt("%.1fs / %.0fs", secs, all[i].budget) : fmt("%.1fs", secs);
    std::printf("criterion %zu: %s  %s: %s  [%s%s]\n", i + 1, pass ? "PASS" : "FAIL", all[i].name,
                o.detail.c_str(), budget.c_str(), in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(all.size()) - failures, all.size());
  return failures;
}
