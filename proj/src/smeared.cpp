#include "modpi/smeared.hpp"

#include <cmath>

namespace modpi {

GaussianState GaussianState::make(const GaussianSpec& s, double hbar) {
  if (!(s.sigma > 0)) throw InvalidParams("Gaussian width must be positive");
  const double s2 = s.sigma * s.sigma;
  return {1.0 / (4 * s2), cplx(s.q / (2 * s2), s.p / hbar),
          std::pow(2 * kPi * s2, -0.25) * std::exp(-s.q * s.q / (4 * s2))};
}

GaussianState GaussianState::coherent(cplx z, const PhysicalParams& p) {
  const double h = p.hbar, mw = p.mw();
  const double q = std::sqrt(2 * h / mw) * z.real(), mom = std::sqrt(2 * h * mw) * z.imag();
  return {mw / (2 * h), cplx(mw * q / h, mom / h),
          std::pow(mw / (kPi * h), 0.25) * std::exp(-mw * q * q / (2 * h) - kI * (q * mom / (2 * h)))};
}

SchrodingerWavefunction GaussianState::wavefunction() const {
  const GaussianState s = *this;
  auto f = [s](double y) { return s(y); };
  auto df = [s](double y) { return (-2.0 * s.a * y + s.b) * s(y); };
  const double ar = a.real(), br = b.real();
  const double norm = std::abs(C) * std::pow(kPi / (2 * ar), 0.25) * std::exp(br * br / (4 * ar));
  return SchrodingerWavefunction(f, df, norm, centre(), reach());
}

GaussianState evolve_gaussian(const GaussianState& s, cplx T, const PhysicalParams& p) {
  if (T.imag() > 0) throw InvalidParams("evolution needs Im T <= 0");
  // Kernel N exp{ik[(x^2 + y^2) c - 2xy]}; the Gaussian y-integral in closed form.
  const cplx N = mehler_kernel(0.0, 0.0, T, p);
  const cplx sn = std::sin(p.omega * T), c = std::cos(p.omega * T);
  const cplx k = p.mw() / (2 * p.hbar * sn);
  const double ks = p.mw() / (2 * p.hbar);  // k sin, free of cancellation
  const cplx A = s.a - kI * k * c;
  GaussianState out;
  out.a = (ks * ks - kI * k * c * s.a) / A;
  out.b = -kI * k * s.b / A;
  out.C = N * s.C * std::sqrt(kPi / A) * std::exp(s.b * s.b / (4.0 * A));
  return out;
}

cplx gaussian_overlap(const GaussianState& f, const GaussianState& g) {
  const cplx A = std::conj(f.a) + g.a, B = std::conj(f.b) + g.b;
  return std::conj(f.C) * g.C * std::sqrt(kPi / A) * std::exp(B * B / (4.0 * A));
}

cplx smeared_oracle(const GaussianState& f, const GaussianState& g, cplx T, const PhysicalParams& p) {
  return gaussian_overlap(f, evolve_gaussian(g, T, p));
}

std::vector<cplx> fock_coefficients(const SchrodingerWavefunction& psi, const PhysicalParams& p,
                                    int cutoff) {
  const double L = psi.reach();
  const QuadRule q = gauss_legendre(16, psi.centre() - L, psi.centre() + L,
                                    std::max(1, static_cast<int>(std::ceil(2 * L / 0.25))));
  const double s = std::sqrt(p.mw() / p.hbar), scale = std::sqrt(s);
  std::vector<cplx> c(cutoff, 0.0);
  for (int i = 0; i < q.size(); ++i) {
    const std::vector<double> h = hermite_functions(cutoff - 1, q.x[i] * s);
    const cplx v = q.w[i] * psi(q.x[i]) * scale;
    for (int n = 0; n < cutoff; ++n) c[n] += h[n] * v;
  }
  return c;
}

cplx fock_amplitude(const SchrodingerWavefunction& f, const SchrodingerWavefunction& g, cplx T,
                    const PhysicalParams& p, int cutoff) {
  const auto cf = fock_coefficients(f, p, cutoff), cg = fock_coefficients(g, p, cutoff);
  cplx s = 0;
  for (int n = 0; n < cutoff; ++n) s += std::conj(cf[n]) * cg[n] * std::exp(-kI * (n + 0.5) * p.omega * T);
  return s;
}

CellTensor CellTensor::make(const ModularLattice& lat, int order) {
  if (lat.dim() != 1) throw UnsupportedDim("cell tensor grid is implemented for d = 1");
  if (order < 1) throw InvalidParams("quadrature order must be >= 1");
  const double h = 0.5 * lat.lambda[0], ht = 0.5 * lat.lambda_tilde[0];
  return {gauss_legendre(order, -h, h), gauss_legendre(order, -ht, ht)};
}

std::vector<cplx> zak_on_grid(const SchrodingerWavefunction& psi, const CellTensor& grid,
                              const AmplitudeRequest& req, int n_zak) {
  const int Q = grid.order();
  std::vector<cplx> v(grid.size());
  for (int i = 0; i < Q; ++i)
    for (int j = 0; j < Q; ++j)
      v[i * Q + j] = zak_transform(psi, req.lattice, req.gauge, grid.at(i, j), req.params, n_zak);
  return v;
}

cplx smeared_exact_amplitude(const AmplitudeRequest& req, const SchrodingerWavefunction& f,
                             const SchrodingerWavefunction& g, int order, Exec ex) {
  req.validate();
  const CellTensor grid = CellTensor::make(req.lattice, order);
  const auto pf = zak_on_grid(f, grid, req, 24), p0 = zak_on_grid(g, grid, req, 24);
  const int Q = grid.order(), n = grid.size();
  double re = 0, im = 0;
  auto row = [&](int a) {
    AmplitudeRequest r = req;
    r.Xf = grid.at(a / Q, a % Q);
    cplx s = 0;
    for (int b = 0; b < n; ++b) {
      r.X0 = grid.at(b / Q, b % Q);
      s += grid.weight(b / Q, b % Q) * exact_amplitude(r) * p0[b];
    }
    return grid.weight(a / Q, a % Q) * std::conj(pf[a]) * s;
  };
  if (ex == Exec::Parallel) {
#pragma omp parallel for reduction(+ : re, im) schedule(dynamic)
    for (int a = 0; a < n; ++a) {
      const cplx v = row(a);
      re += v.real();
      im += v.imag();
    }
  } else {
    for (int a = 0; a < n; ++a) {
      const cplx v = row(a);
      re += v.real();
      im += v.imag();
    }
  }
  return {re, im};
}

cplx extrapolate_to_zero(const std::vector<double>& rho, const std::vector<cplx>& v) {
  const int n = static_cast<int>(rho.size());
  if (n == 0 || static_cast<int>(v.size()) != n) throw InvalidParams("ladder sizes differ");
  CMat V(n, n);
  CVec y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = v[i];
    for (int k = 0; k < n; ++k) V(i, k) = std::pow(rho[i], k);
  }
  return V.fullPivLu().solve(y)[0];
}

namespace {

// One slice at d = 1, split as K(X1, X0) = A(x0, xt0, xt1) B(x1, xt1, x0).
struct Slice {
  double h, mw, wdt, lam, lt, gc;
  DualTheta1 sx, sp;

  Slice(const AmplitudeRequest& req, double dt)
      : h(req.params.hbar),
        mw(req.params.mw()),
        wdt(req.params.omega * dt),
        lam(req.lattice.lambda[0]),
        lt(req.lattice.lambda_tilde[0]),
        gc(req.gauge.coeff(req.params.hbar)),
        sx(cplx(-wdt * mw * lam * lam / (2 * kPi * h), req.epsilon), req.trunc),
        sp(cplx(-wdt * lt * lt / (mw * 2 * kPi * h), req.epsilon), req.trunc) {}

  cplx a_part(double x0, double xt0, double xt1) const {
    const cplx zx = lam * (-(xt1 - xt0) - wdt * mw * x0) / (2 * kPi * h);
    const double ph = (x0 * xt0 - x0 * xt1) / (2 * h) - wdt * mw * x0 * x0 / (2 * h) + gc * x0 * xt0;
    return sx(zx) * std::polar(1.0, ph);
  }
  cplx b_part(double x1, double xt1, double x0) const {
    const cplx zp = lt * ((x1 - x0) - wdt * xt1 / mw) / (2 * kPi * h);
    const double ph = (xt1 * x1 - xt1 * x0) / (2 * h) - wdt * xt1 * xt1 / (mw * 2 * h) - gc * x1 * xt1;
    return sp(zp) * std::polar(1.0 / (2 * kPi * h), ph);
  }
};

void require_slicing(const AmplitudeRequest& req) {
  req.validate();
  if (req.params.dims != 1) throw UnsupportedDim("smeared slicing is implemented for d = 1");
  if (req.regulator != Regulator::Identity) throw InvalidParams("time slicing uses the identity regulator");
}

}  // namespace

LadderResult smeared_one_step(const AmplitudeRequest& req, const SchrodingerWavefunction& f,
                              const SchrodingerWavefunction& g, double dt, const OneStepOptions& o,
                              Exec ex) {
  require_slicing(req);
  if (!(dt > 0)) throw InvalidParams("dt must be positive");
  const auto& p = req.params;
  const double h = p.hbar, lam = req.lattice.lambda[0], lt = req.lattice.lambda_tilde[0];
  const double gc = req.gauge.coeff(h);
  const CellTensor cell = CellTensor::make(req.lattice, o.x0_order);
  const auto phi0 = zak_on_grid(g, cell, req, o.n_zak);
  const int Q0 = cell.order(), NZ = o.n_zak;

  LadderResult out;
  out.rho = o.rho;
  for (double rho : o.rho) {
    AmplitudeRequest r = req;
    r.epsilon = rho * p.omega * dt;
    const Slice sl(r, dt);
    // Kernel width in the G-norm; the window stops at half a cell.
    const double w = std::sqrt(2 * h * p.omega * dt * (1 + rho * rho) / rho);
    const double hx = std::min(0.5 * lam, o.window_widths * w / std::sqrt(p.mw()));
    const double hp = std::min(0.5 * lt, o.window_widths * w * std::sqrt(p.mw()));
    const int nd = rho < 1 ? o.window_order_fine : o.window_order;
    const QuadRule dx = gauss_legendre(nd, -hx, hx), dp = gauss_legendre(nd, -hp, hp);

    auto at_x0 = [&](int c) {
      const int i0 = c / Q0, j0 = c % Q0;
      const double x0 = cell.x.x[i0], xt0 = cell.xt.x[j0];
      // phi_f on the shifted window, summed image by image.
      std::vector<cplx> psi(nd * (2 * NZ + 1)), ex_(nd * (2 * NZ + 1));
      for (int a = 0; a < nd; ++a)
        for (int n = -NZ; n <= NZ; ++n) psi[a * (2 * NZ + 1) + n + NZ] = f(x0 + dx.x[a] + lam * n);
      for (int b = 0; b < nd; ++b)
        for (int n = -NZ; n <= NZ; ++n)
          ex_[b * (2 * NZ + 1) + n + NZ] = std::polar(1.0, -(xt0 + dp.x[b]) * lam * n / h);
      std::vector<cplx> A(nd);
      for (int b = 0; b < nd; ++b) A[b] = sl.a_part(x0, xt0, xt0 + dp.x[b]);
      cplx s = 0;
      for (int a = 0; a < nd; ++a) {
        const double x1 = x0 + dx.x[a];
        cplx row = 0;
        for (int b = 0; b < nd; ++b) {
          const double xt1 = xt0 + dp.x[b];
          cplx z = 0;
          for (int k = 0; k < 2 * NZ + 1; ++k) z += ex_[b * (2 * NZ + 1) + k] * psi[a * (2 * NZ + 1) + k];
          const cplx phif = z * std::polar(1.0 / std::sqrt(lt), -gc * x1 * xt1 - x1 * xt1 / (2 * h));
          row += dp.w[b] * std::conj(phif) * A[b] * sl.b_part(x1, xt1, x0);
        }
        s += dx.w[a] * row;
      }
      return cell.weight(i0, j0) * phi0[c] * s;
    };

    double re = 0, im = 0;
    const int n0 = cell.size();
    if (ex == Exec::Parallel) {
#pragma omp parallel for reduction(+ : re, im) schedule(dynamic)
      for (int c = 0; c < n0; ++c) {
        const cplx v = at_x0(c);
        re += v.real();
        im += v.imag();
      }
    } else {
      for (int c = 0; c < n0; ++c) {
        const cplx v = at_x0(c);
        re += v.real();
        im += v.imag();
      }
    }
    out.values.emplace_back(re, im);
  }
  out.extrapolated = extrapolate_to_zero(out.rho, out.values);
  return out;
}

std::vector<cplx> smeared_transfer(const std::vector<cplx>& v, const CellTensor& grid, double dt,
                                   const AmplitudeRequest& req, Exec ex) {
  require_slicing(req);
  const int Q = grid.order(), n = grid.size();
  if (static_cast<int>(v.size()) != n) throw DimensionMismatch("vector does not match the grid");
  std::vector<cplx> out(n, 0.0);
  if (ex == Exec::Serial) {
    for (int k = 0; k < Q; ++k)
      for (int l = 0; l < Q; ++l) {
        cplx s = 0;
        for (int i = 0; i < Q; ++i)
          for (int j = 0; j < Q; ++j)
            s += grid.weight(i, j) * infinitesimal_amplitude_theta(grid.at(k, l), grid.at(i, j), dt, req) *
                 v[i * Q + j];
        out[k * Q + l] = s;
      }
    return out;
  }
  const Slice sl(req, dt);
  // T(x0, xt1) = sum_xt0 A(x0, xt0, xt1) w v
  std::vector<cplx> T(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < Q; ++i)
    for (int l = 0; l < Q; ++l) {
      cplx s = 0;
      for (int j = 0; j < Q; ++j)
        s += sl.a_part(grid.x.x[i], grid.xt.x[j], grid.xt.x[l]) * grid.weight(i, j) * v[i * Q + j];
      T[i * Q + l] = s;
    }
#pragma omp parallel for schedule(static)
  for (int k = 0; k < Q; ++k)
    for (int l = 0; l < Q; ++l) {
      cplx s = 0;
      for (int i = 0; i < Q; ++i) s += sl.b_part(grid.x.x[k], grid.xt.x[l], grid.x.x[i]) * T[i * Q + l];
      out[k * Q + l] = s;
    }
  return out;
}

cplx smeared_compose(const AmplitudeRequest& req, const SchrodingerWavefunction& f,
                     const SchrodingerWavefunction& g, int N, double rho, int order, int n_zak,
                     Exec ex) {
  require_slicing(req);
  if (N < 1) throw InvalidParams("N must be >= 1");
  if (!(rho > 0)) throw InvalidParams("rho must be positive");
  const double dt = req.duration() / N;
  AmplitudeRequest r = req;
  r.epsilon = rho * req.params.omega * dt;
  const CellTensor grid = CellTensor::make(req.lattice, order);
  std::vector<cplx> v = zak_on_grid(g, grid, req, n_zak);
  for (int s = 0; s < N; ++s) v = smeared_transfer(v, grid, dt, r, ex);
  const auto pf = zak_on_grid(f, grid, req, n_zak);
  const int Q = grid.order();
  cplx s = 0;
  for (int i = 0; i < Q; ++i)
    for (int j = 0; j < Q; ++j) s += grid.weight(i, j) * std::conj(pf[i * Q + j]) * v[i * Q + j];
  return s;
}

LadderResult smeared_compose_ladder(const AmplitudeRequest& req, const SchrodingerWavefunction& f,
                                    const SchrodingerWavefunction& g, int N, const ComposeOptions& o,
                                    Exec ex) {
  LadderResult out;
  out.rho = o.rho;
  for (double rho : o.rho) out.values.push_back(smeared_compose(req, f, g, N, rho, o.order, o.n_zak, ex));
  out.extrapolated = extrapolate_to_zero(out.rho, out.values);
  return out;
}

cplx SmearedSectors::sector(int w) const {
  for (const auto& s : sectors)
    if (s.w == w) return s.value;
  return 0.0;
}

namespace {

// Gauss-Legendre panels of width <= 0.25 on [a, b]; empty when b <= a.
QuadRule panels(double a, double b) {
  if (!(b > a)) return {};
  return gauss_legendre(16, a, b, std::max(1, static_cast<int>(std::ceil((b - a) / 0.25))));
}

}  // namespace

SmearedSectors smeared_sectors(const GaussianState& f, const GaussianState& g, cplx T, double lambda,
                               const PhysicalParams& p) {
  if (!(lambda > 0)) throw InvalidParams("lambda must be positive");
  const GaussianState gT = evolve_gaussian(g, T, p);
  const cplx N = mehler_kernel(0.0, 0.0, T, p);
  const cplx sn = std::sin(p.omega * T), c = std::cos(p.omega * T);
  const cplx k = p.mw() / (2 * p.hbar * sn);
  auto K = [&](double x, double y) { return N * std::exp(kI * k * ((x * x + y * y) * c - 2 * x * y)); };
  auto box = [&](double y) { return static_cast<int>(std::floor(y / lambda + 0.5)); };
  const double c0 = g.centre(), r0 = g.reach(), cf = f.centre(), rf = f.reach();
  const int nlo = box(c0 - r0), nhi = box(c0 + r0), nstar = box(c0);
  const int mlo = box(cf - rf), mhi = box(cf + rf);

  std::vector<QuadRule> ybox;
  for (int n = nlo; n <= nhi; ++n)
    ybox.push_back(panels(std::max(lambda * (n - 0.5), c0 - r0), std::min(lambda * (n + 0.5), c0 + r0)));

  const int wlo = mlo - nhi, whi = mhi - nlo;
  std::vector<cplx> acc(whi - wlo + 1, 0.0);
  for (int m = mlo; m <= mhi; ++m) {
    const QuadRule xr = panels(std::max(lambda * (m - 0.5), cf - rf), std::min(lambda * (m + 0.5), cf + rf));
    for (int a = 0; a < xr.size(); ++a) {
      const double x = xr.x[a];
      const cplx wf = xr.w[a] * std::conj(f(x));
      // I_n(x) for every box but the one holding the centre, which is the remainder.
      cplx others = 0;
      for (int n = nlo; n <= nhi; ++n) {
        if (n == nstar) continue;
        const QuadRule& q = ybox[n - nlo];
        cplx I = 0;
        for (int b = 0; b < q.size(); ++b) I += q.w[b] * K(x, q.x[b]) * g(q.x[b]);
        others += I;
        acc[m - n - wlo] += wf * I;
      }
      acc[m - nstar - wlo] += wf * (gT(x) - others);
    }
  }
  SmearedSectors out;
  out.total = 0;
  for (int w = wlo; w <= whi; ++w) {
    out.sectors.push_back({w, acc[w - wlo]});
    out.total += acc[w - wlo];
  }
  out.mehler = gaussian_overlap(f, gT);
  return out;
}

LimitScan schrodinger_limit_scan(const GaussianState& psi0, const GaussianState& psif, double T,
                                 const std::vector<double>& ladder, const PhysicalParams& p) {
  p.validate();
  if (p.dims != 1) throw UnsupportedDim("limit scan is implemented for d = 1");
  const double unit = std::sqrt(p.hbar / p.mw());
  const SchrodingerWavefunction psi = psi0.wavefunction();
  LimitScan scan;
  for (double s : ladder) {
    const double lam = s * unit;
    const SmearedSectors sec = smeared_sectors(psif, psi0, T, lam, p);
    LimitRow row;
    row.lambda = lam;
    row.modular = sec.total;
    row.mehler = sec.mehler;
    row.total_diff = std::abs(sec.total - sec.mehler);
    // Off-sector pieces are summed directly: subtracting from the total would
    // bury them under rounding once they fall below 1e-16.
    const cplx a0 = sec.sector(0);
    cplx rest = 0;
    for (const auto& v : sec.sectors)
      if (v.w != 0) {
        rest += v.value;
        row.offsector += std::abs(v.value);
      }
    row.w0_diff = std::abs(rest);
    row.share = std::abs(a0) / (std::abs(a0) + row.offsector);
    const auto lat = ModularLattice::from_lambda(lam, p);
    const double lt = lat.lambda_tilde[0];
    for (int i = 0; i <= 40; ++i) {
      const double x = -1.0 + 2.0 * i / 40;
      for (int j = 0; j < 9; ++j) {
        const PhasePoint X(x, -0.5 * lt + lt * j / 9);
        const cplx v = std::sqrt(lt) * zak_transform(psi, lat, Gauge::schrodinger(), X, p, 24);
        row.zak_error = std::max(row.zak_error, std::abs(v - psi(x)));
      }
    }
    scan.rows.push_back(row);
  }
  // Least squares for log(offsector) = log_a - c lambda^2.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : scan.rows) {
    if (!(r.offsector > 0)) continue;
    const double X = r.lambda * r.lambda, Y = std::log(r.offsector);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    ++n;
  }
  if (n >= 2) {
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    scan.fit_c = -slope;
    scan.fit_log_a = (sy - slope * sx) / n;
  }
  scan.share_monotone = scan.w0_diff_decreasing = scan.zak_decreasing = scan.rows.size() >= 2;
  for (size_t i = 1; i < scan.rows.size(); ++i) {
    const auto &a = scan.rows[i - 1], &b = scan.rows[i];
    scan.share_monotone = scan.share_monotone && b.share > a.share;
    scan.w0_diff_decreasing = scan.w0_diff_decreasing && b.w0_diff < a.w0_diff;
    scan.zak_decreasing = scan.zak_decreasing && b.zak_error < a.zak_error;
  }
  return scan;
}

}  // namespace modpi
