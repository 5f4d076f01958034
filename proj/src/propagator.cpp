#include "modpi/propagator.hpp"

#include <cmath>

#include "modpi/zak.hpp"

namespace modpi {

AmplitudeRequest AmplitudeRequest::make(const PhysicalParams& p, double T, double lattice_scale) {
  AmplitudeRequest r;
  r.params = p;
  r.lattice = ModularLattice::symmetric(p, lattice_scale);
  r.X0 = PhasePoint(p.dims);
  r.Xf = PhasePoint(p.dims);
  r.tf = T;
  return r;
}

void AmplitudeRequest::validate() const {
  params.validate();
  lattice.validate(params);
  if (lattice.dim() != params.dims) throw DimensionMismatch("lattice dimension differs from params.dims");
  if (X0.dim() != params.dims || Xf.dim() != params.dims)
    throw DimensionMismatch("endpoint dimension differs from params.dims");
  if (!X0.finite() || !Xf.finite()) throw InvalidParams("endpoints must be finite");
  if (!(tf > t0)) throw InvalidParams("tf must exceed t0");
  if (!(epsilon > 0)) throw InvalidParams("epsilon must be positive");
  if (winding_cut < 0) throw InvalidParams("winding_cut must be >= 0");
}

cplx mehler_kernel(double xf, double x0, cplx T, const PhysicalParams& p) {
  const cplx wt = p.omega * T;
  const cplx s = std::sin(wt), c = std::cos(wt);
  if (std::abs(s) <= 1e-12) throw CausticError("Mehler kernel at a caustic (sin Omega T = 0)");
  // Principal root is right on (0, pi); each caustic crossing adds -i.
  const int k = static_cast<int>(std::floor(wt.real() / kPi));
  const int flips = static_cast<int>(std::floor((k + 1) / 2.0));
  const double sign = (flips % 2 == 0) ? 1.0 : -1.0;
  const cplx amp = sign * std::sqrt(p.mw() / (2 * kPi * kI * p.hbar * s));
  const cplx kk = p.mw() / (2 * p.hbar * s);
  return amp * std::exp(kI * kk * ((x0 * x0 + xf * xf) * c - 2 * x0 * xf));
}

namespace {

void require_d1(const AmplitudeRequest& req, const char* what) {
  if (req.params.dims != 1) throw UnsupportedDim(std::string(what) + " is implemented for d = 1");
}

cplx complex_time(const AmplitudeRequest& req) {
  return cplx(req.duration(), -req.epsilon / req.params.omega);
}

// Genus-2 data of the exact double sum: index v = (n, n') for (x0 + lambda n, xf + lambda n').
struct ExactSeries {
  CMat tau;
  CVec z;
  cplx pre;
};

ExactSeries exact_series(const AmplitudeRequest& req) {
  req.validate();
  require_d1(req, "exact_amplitude");
  const auto& p = req.params;
  const double h = p.hbar, lam = req.lattice.lambda[0], lt = req.lattice.lambda_tilde[0];
  const double x0 = req.X0.x[0], xt0 = req.X0.xt[0], xf = req.Xf.x[0], xtf = req.Xf.xt[0];
  const cplx T = complex_time(req);
  const cplx s = std::sin(p.omega * T), c = std::cos(p.omega * T);
  const cplx k = p.mw() / (2 * h * s);
  ExactSeries e;
  e.tau.resize(2, 2);
  const cplx a = k * lam * lam / kPi;
  e.tau << a * c, -a, -a, a * c;
  e.z.resize(2);
  e.z << (2.0 * k * lam * (c * x0 - xf) + xt0 * lam / h) / (2 * kPi),
      (2.0 * k * lam * (c * xf - x0) - xtf * lam / h) / (2 * kPi);
  const auto& g = req.gauge;
  e.pre = std::exp(kI * (-g.alpha(req.Xf, h) + g.alpha(req.X0, h) - 0.5 * xf * xtf / h +
                         0.5 * x0 * xt0 / h)) *
          mehler_kernel(xf, x0, T, p) / lt;
  return e;
}

ThetaValue guarded_theta(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr) {
  try {
    return theta_eval(z, tau, tr);
  } catch (const TruncationInsufficient& e) {
    throw TailTooLarge(e.what());
  }
}

}  // namespace

cplx exact_amplitude(const AmplitudeRequest& req) {
  const ExactSeries e = exact_series(req);
  return e.pre * guarded_theta(e.z, SiegelMatrix(e.tau), req.trunc).value;
}

std::vector<SectorValue> exact_amplitude_sectors(const AmplitudeRequest& req, int wmax) {
  const ExactSeries e = exact_series(req);
  const cplx t00 = e.tau(0, 0), t01 = e.tau(0, 1), t11 = e.tau(1, 1);
  const SiegelMatrix tw(t00 + 2.0 * t01 + t11);
  std::vector<SectorValue> out;
  for (int w = -wmax; w <= wmax; ++w) {
    const cplx zw = e.z[0] + e.z[1] + (t01 + t11) * double(w);
    // Recentre on the dominant index so that far sectors underflow instead of overflowing.
    const double m = std::round(-zw.imag() / tw.tau()(0, 0).imag());
    const cplx zs = zw + tw.tau()(0, 0) * m;
    const cplx ex = kI * kPi * (t11 * double(w * w) + 2.0 * e.z[1] * double(w) +
                                tw.tau()(0, 0) * m * m + 2.0 * m * zw);
    out.push_back({w, e.pre * std::exp(ex) * guarded_theta(CVec::Constant(1, zs), tw, req.trunc).value});
  }
  return out;
}

namespace {

struct Step {
  PhasePoint Xs, dX;
  cplx pre;
};

Step step_data(const PhasePoint& Xn, const PhasePoint& Xp, double dt, const AmplitudeRequest& req) {
  if (!(dt > 0)) throw InvalidParams("dt must be positive");
  if (req.regulator != Regulator::Identity)
    throw InvalidParams("time slicing uses the identity regulator");
  require_same_dim(Xn, Xp);
  if (Xn.dim() != req.lattice.dim()) throw DimensionMismatch("point and lattice dimensions differ");
  const auto& p = req.params;
  const double h = p.hbar;
  Step s{PhasePoint(Xp.x, Xn.xt), Xn - Xp, 0.0};
  const double ph = -req.gauge.alpha(Xn, h) + req.gauge.alpha(Xp, h) +
                    symplectic(s.Xs, s.dX) / (2 * h) - p.omega * dt * metric(s.Xs, s.Xs, p) / (2 * h);
  s.pre = std::exp(kI * ph) * std::pow(2 * kPi * h, -Xn.dim());
  return s;
}

// Xi = -(Omega dt / 2 pi hbar) Lbar G Lbar + i eps,  z = (2 pi hbar)^-1 Lbar (omega dX - Omega dt G X*)
void step_theta_data(const Step& s, double dt, const AmplitudeRequest& req, CMat& xi, CVec& z) {
  const auto& p = req.params;
  const Geometry geo = Geometry::make(p);
  const Mat Lb = req.lattice.bar();
  const double tph = 2 * kPi * p.hbar;
  const int D = Lb.rows();
  xi = (-(p.omega * dt / tph) * (Lb * geo.G * Lb)).cast<cplx>();
  xi.diagonal().array() += kI * req.epsilon;
  z = (Lb * (geo.omega * s.dX.stacked() - p.omega * dt * geo.G * s.Xs.stacked()) / tph).cast<cplx>();
  (void)D;
}

// Smallest R with sum_{|n|_inf > R} exp(-pi eps |n|^2) <= tol over Z^D.
int gaussian_radius(double eps, int D, double tol) {
  for (int R = 0; R < 1 << 20; ++R) {
    double tail = 0;
    for (int k = R + 1;; ++k) {
      const double t = (std::pow(2.0 * k + 1, D) - std::pow(2.0 * k - 1, D)) * std::exp(-kPi * eps * k * k);
      tail += t;
      if (t < 1e-3 * tol || k > R + 100000) break;
    }
    if (tail <= tol) return R;
  }
  return 1 << 20;
}

}  // namespace

cplx infinitesimal_amplitude_sum(const PhasePoint& Xn, const PhasePoint& Xp, double dt,
                                 const AmplitudeRequest& req) {
  const Step s = step_data(Xn, Xp, dt, req);
  const auto& p = req.params;
  const double h = p.hbar, eps = req.epsilon;
  if (!(eps > 0)) throw InvalidParams("epsilon must be positive");
  const int d = Xn.dim(), D = 2 * d;
  const int R = gaussian_radius(eps, D, req.trunc.tail_tol);
  if (std::pow(2.0 * R + 1, D) > 5e8) throw TailTooLarge("lattice sum needs too many terms at this epsilon");
  const Vec lam = req.lattice.lambda, lt = req.lattice.lambda_tilde;
  const double wdt = p.omega * dt;
  double re = 0, im = 0;
  if (d == 1) {
    const double x = s.Xs.x[0], xt = s.Xs.xt[0], dx = s.dX.x[0], dxt = s.dX.xt[0], mw = p.mw();
    for (int n = -R; n <= R; ++n) {
      const double k = lam[0] * n;
      for (int m = -R; m <= R; ++m) {
        const double kt = lt[0] * m;
        // G(K,K)/2 + G(K,X*) in the Omega dt term; omega(K, dX) = kt dx - k dxt
        const double G_KK = mw * k * k + kt * kt / mw, G_KX = mw * k * x + kt * xt / mw;
        const double ph = (-0.5 * wdt * G_KK - wdt * G_KX + (kt * dx - k * dxt)) / h;
        const double damp = std::exp(-kPi * eps * double(n * n + m * m));
        re += damp * std::cos(ph);
        im += damp * std::sin(ph);
      }
    }
  } else {
    std::vector<int> idx(D, -R);
    while (true) {
      PhasePoint K(d);
      double n2 = 0;
      for (int i = 0; i < d; ++i) {
        K.x[i] = lam[i] * idx[i];
        K.xt[i] = lt[i] * idx[d + i];
      }
      for (int v : idx) n2 += double(v) * v;
      const double ph = (-0.5 * wdt * metric(K, K, p) - wdt * metric(K, s.Xs, p) + symplectic(K, s.dX)) / h;
      const double damp = std::exp(-kPi * eps * n2);
      re += damp * std::cos(ph);
      im += damp * std::sin(ph);
      int j = 0;
      while (j < D && ++idx[j] > R) idx[j++] = -R;
      if (j == D) break;
    }
  }
  return s.pre * cplx(re, im);
}

cplx infinitesimal_amplitude_theta(const PhasePoint& Xn, const PhasePoint& Xp, double dt,
                                   const AmplitudeRequest& req) {
  const Step s = step_data(Xn, Xp, dt, req);
  CMat xi;
  CVec z;
  step_theta_data(s, dt, req, xi, z);
  try {
    return s.pre * theta_dual(z, SiegelMatrix(xi), req.trunc).value;
  } catch (const TruncationInsufficient& e) {
    throw TailTooLarge(e.what());
  }
}

cplx infinitesimal_theta_factor(const PhasePoint& Xn, const PhasePoint& Xp, double dt,
                                const AmplitudeRequest& req) {
  const Step s = step_data(Xn, Xp, dt, req);
  CMat xi;
  CVec z;
  step_theta_data(s, dt, req, xi, z);
  const CMat xinv = SiegelMatrix(xi).tau().inverse();
  const SiegelMatrix dual(-xinv);
  const Vec u = -dual.tau().imag().llt().solve((xinv * z).imag());
  const CVec d = z - u.array().round().matrix().cast<cplx>();
  return theta_eval(xinv * d, dual, req.trunc).value;
}

namespace {

cplx compose_rest(int k, const PhasePoint& Xprev, const AmplitudeRequest& req, int N, double dt,
                  const CellGrid& grid) {
  if (k == N - 1) return infinitesimal_amplitude_theta(req.Xf, Xprev, dt, req);
  cplx s = 0;
  for (int i = 0; i < grid.size(); ++i) {
    const PhasePoint X = Xprev + grid.pts[i];
    s += grid.w[i] * compose_rest(k + 1, X, req, N, dt, grid) * infinitesimal_amplitude_theta(X, Xprev, dt, req);
  }
  return s;
}

}  // namespace

cplx compose_amplitude(const AmplitudeRequest& req, const SlicingPlan& plan, Exec ex) {
  req.validate();
  if (plan.N < 1) throw InvalidParams("N must be >= 1");
  if (plan.quadrature_order < 1) throw InvalidParams("quadrature order must be >= 1");
  const double dt = req.duration() / plan.N;
  if (plan.N == 1) return infinitesimal_amplitude_theta(req.Xf, req.X0, dt, req);
  const double cost = std::pow(double(plan.quadrature_order), 2.0 * req.params.dims * (plan.N - 1)) * plan.N;
  if (cost > plan.budget)
    throw BudgetExceeded("composition needs " + std::to_string(cost) + " step evaluations");
  const CellGrid grid = make_cell_grid(req.lattice, plan.quadrature_order);
  const int n = grid.size();
  double re = 0, im = 0;
  auto body = [&](int i) {
    const PhasePoint X = req.X0 + grid.pts[i];
    return grid.w[i] * compose_rest(1, X, req, plan.N, dt, grid) *
           infinitesimal_amplitude_theta(X, req.X0, dt, req);
  };
  if (ex == Exec::Parallel) {
#pragma omp parallel for reduction(+ : re, im) schedule(dynamic, 4)
    for (int i = 0; i < n; ++i) {
      const cplx v = body(i);
      re += v.real();
      im += v.imag();
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const cplx v = body(i);
      re += v.real();
      im += v.imag();
    }
  }
  return {re, im};
}

cplx onshell_action_complex(const PhasePoint& X0, const PhasePoint& Y, cplx T, const Gauge& g,
                            const PhysicalParams& p) {
  const double h = p.hbar;
  const PhasePoint D = Y - X0;
  const cplx c = 1.0 / std::tan(0.5 * p.omega * T);
  return -h * g.alpha(Y, h) + h * g.alpha(X0, h) - 0.5 * symplectic(X0, Y) + 0.25 * c * metric(D, D, p);
}

SemiclassicalValue semiclassical_amplitude(const AmplitudeRequest& req) {
  req.validate();
  const auto& p = req.params;
  const double h = p.hbar;
  const double wT = p.omega * req.duration();
  if (std::abs(std::remainder(wT, 2 * kPi)) < 1e-9) throw ResonantTime("Omega T is a multiple of 2 pi");
  const bool ctime = req.regulator == Regulator::ComplexTime;
  const cplx T = ctime ? complex_time(req) : cplx(req.duration());
  const double eps_id = ctime ? 0.0 : req.epsilon;
  const int d = p.dims;
  const auto& lat = req.lattice;
  const Gauge& g = req.gauge;

  SemiclassicalValue out;
  // Direct winding sum: e^{i beta(Xf, W)} e^{i S[X_W] / hbar}.
  {
    const int C = req.winding_cut, D = 2 * d;
    std::vector<int> idx(D, -C);
    cplx s = 0;
    while (true) {
      IVec n(d), nt(d);
      double n2 = 0;
      for (int i = 0; i < d; ++i) {
        n[i] = idx[i];
        nt[i] = idx[d + i];
      }
      for (int v : idx) n2 += double(v) * v;
      const LatticeVector W(n, nt, lat);
      const PhasePoint Y = req.Xf + W.embed();
      const double beta = beta_phase(req.Xf, W, g, p);
      s += std::exp(kI * beta + kI * onshell_action_complex(req.X0, Y, T, g, p) / h - kPi * eps_id * n2);
      int j = 0;
      while (j < D && ++idx[j] > C) idx[j++] = -C;
      if (j == D) break;
    }
    out.direct = s;
  }
  // Theta form: tau = (4 pi hbar)^-1 Lbar (eta + c G) Lbar + i eps,
  //             z = (4 pi hbar)^-1 Lbar (omega (X0 + Xf) + c G (Xf - X0)).
  {
    const Geometry geo = Geometry::make(p);
    const Mat Lb = lat.bar();
    const cplx c = 1.0 / std::tan(0.5 * p.omega * T);
    const double f = 1.0 / (4 * kPi * h);
    CMat tau = f * (Lb * geo.eta * Lb).cast<cplx>() + f * c * (Lb * geo.G * Lb).cast<cplx>();
    tau.diagonal().array() += kI * eps_id;
    const PhasePoint D = req.Xf - req.X0;
    const CVec z = f * (Lb * geo.omega * (req.X0 + req.Xf).stacked()).cast<cplx>() +
                   f * c * (Lb * geo.G * D.stacked()).cast<cplx>();
    const cplx pre = std::exp(kI * (-g.alpha(req.Xf, h) + g.alpha(req.X0, h) -
                                    symplectic(req.X0, req.Xf) / (2 * h)) +
                              kI * c * metric(D, D, p) / (4 * h));
    out.theta = pre * guarded_theta(z, SiegelMatrix(tau), req.trunc).value;
  }
  return out;
}

}  // namespace modpi
