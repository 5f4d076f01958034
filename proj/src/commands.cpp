#include "modpi/commands.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>

#include "modpi/dynamics.hpp"
#include "modpi/legendre.hpp"
#include "modpi/smeared.hpp"

namespace modpi {

using json = nlohmann::json;

namespace {

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = std::filesystem::path(cfg.out_dir) / name;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f.precision(17);
  f << std::boolalpha;
  return f;
}

void require_d1(const RunConfig& cfg, const char* what) {
  if (cfg.params.dims != 1) throw UnsupportedDim(std::string(what) + " runs at d = 1");
}

json pair_json(const PhasePoint& X) { return json::array({X.x[0], X.xt[0]}); }
json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

std::vector<double> scale_ladder(const RunConfig& cfg) {
  // an explicit lattice is a single rung
  return cfg.lattice_explicit ? std::vector<double>{1.0} : cfg.lattice_scales;
}

// log |A_w| = log_a - c w^2 over the sectors w != 0 that are above underflow.
std::pair<double, double> gaussian_fit(const std::vector<SectorValue>& s) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& v : s) {
    const double a = std::abs(v.value);
    if (v.w == 0 || !(a > 1e-300)) continue;
    const double x = double(v.w) * v.w, y = std::log(a);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den == 0) return {0.0, 0.0};
  const double slope = (n * sxy - sx * sy) / den;
  return {-slope, (sy - slope * sx) / n};
}

}  // namespace

const char* error_name(const std::exception& e) {
  if (dynamic_cast<const CausticError*>(&e)) return "CausticError";
  if (dynamic_cast<const ResonantTime*>(&e)) return "ResonantTime";
  if (dynamic_cast<const NotSiegel*>(&e)) return "NotSiegel";
  if (dynamic_cast<const SingularM*>(&e)) return "SingularM";
  if (dynamic_cast<const TailTooLarge*>(&e)) return "TailTooLarge";
  if (dynamic_cast<const TruncationInsufficient*>(&e)) return "TruncationInsufficient";
  if (dynamic_cast<const BudgetExceeded*>(&e)) return "BudgetExceeded";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const InvalidParams*>(&e)) return "InvalidParams";
  if (dynamic_cast<const DimensionMismatch*>(&e)) return "DimensionMismatch";
  if (dynamic_cast<const UnsupportedDim*>(&e)) return "UnsupportedDim";
  if (dynamic_cast<const BadAux*>(&e)) return "BadAux";
  if (dynamic_cast<const GaugeMismatch*>(&e)) return "GaugeMismatch";
  if (dynamic_cast<const LatticeMismatch*>(&e)) return "LatticeMismatch";
  return "Error";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const TailTooLarge*>(&e) ||
      dynamic_cast<const TruncationInsufficient*>(&e) || dynamic_cast<const BudgetExceeded*>(&e))
    return kExitDomain;
  return kExitConfig;
}

int cmd_theta(const RunConfig& cfg, std::ostream& log) {
  std::vector<int> dims = cfg.theta.dims;
  const CMat* tau = cfg.theta.tau ? &*cfg.theta.tau : nullptr;
  if (tau) dims = {static_cast<int>(tau->rows())};
  std::vector<LemmaRow> rows;
  for (int D : dims) {
    const auto r = lemma_sweep(D, cfg.theta.points, cfg.seed + D, tau, cfg.trunc);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  auto f = open_out(cfg, "theta.csv");
  f << "schema,D,point,lemma1,lemma2,lemma3,lemma4,lemma5,lemma6\n";
  double worst[6] = {};
  for (const auto& r : rows) {
    f << 1 << ',' << r.D << ',' << r.point;
    for (int L = 0; L < 6; ++L) {
      f << ',' << r.residual[L];
      worst[L] = std::max(worst[L], r.residual[L]);
    }
    f << '\n';
  }
  bool ok = true;
  for (int L = 0; L < 6; ++L) {
    log << "lemma " << L + 1 << " max residual " << worst[L] << '\n';
    ok = ok && worst[L] < cfg.theta.tolerance;
  }
  return ok ? kExitOk : kExitTolerance;
}

int cmd_propagate(const RunConfig& cfg, std::ostream& log) {
  require_d1(cfg, "propagate");
  const auto& pc = cfg.propagate;
  const auto scales = scale_ladder(cfg);
  const bool single = scales.size() * pc.T.size() * pc.endpoints.size() == 1;
  auto f = open_out(cfg, "propagate.jsonl");
  bool domain_error = false, tolerance_fail = false;

  const GaussianState g0 = GaussianState::coherent(cfg.z0, cfg.params);
  const GaussianState gf = GaussianState::coherent(cfg.zf, cfg.params);
  const auto w0 = g0.wavefunction(), wf = gf.wavefunction();

  for (double scale : scales) {
    for (double T : pc.T) {
      const AmplitudeRequest base = cfg.request(T, scale);
      const json lat = json::array({base.lattice.lambda[0], base.lattice.lambda_tilde[0]});
      for (const auto& e : pc.endpoints) {
        AmplitudeRequest req = base;
        req.X0 = PhasePoint(e[0], e[1]);
        req.Xf = PhasePoint(e[2], e[3]);
        auto emit = [&](const char* route, auto&& compute) {
          json r = {{"schema", 1}, {"record", "amplitude"}, {"X0", pair_json(req.X0)},
                    {"Xf", pair_json(req.Xf)}, {"T", T}, {"gauge", req.gauge.name()},
                    {"route", route}, {"eps", req.epsilon}, {"lattice", lat}};
          try {
            const cplx v = compute();
            r["re"] = v.real();
            r["im"] = v.imag();
          } catch (const Error& ex) {
            r["re"] = nullptr;
            r["im"] = nullptr;
            r["error"] = error_name(ex);
            r["message"] = ex.what();
            if (dynamic_cast<const DomainError*>(&ex)) domain_error = true;
          }
          f << r.dump() << '\n';
        };
        emit("exact", [&] { return exact_amplitude(req); });
        emit("theta_step", [&] { return infinitesimal_amplitude_theta(req.Xf, req.X0, T, req); });
        emit("composed", [&] {
          return compose_amplitude(req, {cfg.slices.front(), cfg.order, cfg.budget});
        });
        // one evaluation serves both semiclassical routes
        std::optional<SemiclassicalValue> sc;
        auto semi = [&](bool theta_form) {
          if (!sc) sc = semiclassical_amplitude(req);
          return theta_form ? sc->theta : sc->direct;
        };
        emit("semiclassical_direct", [&] { return semi(false); });
        emit("semiclassical_theta", [&] { return semi(true); });
      }

      // Cross-route summary: N-slice composition smeared against coherent states,
      // extrapolated to zero regulator, against the exact amplitude in closed form.
      ComposeOptions opt;
      opt.order = cfg.order;
      opt.n_zak = cfg.n_zak;
      opt.rho = cfg.rho;
      double prev = -1;
      for (int N : cfg.slices) {
        json s = {{"schema", 1}, {"record", "summary"}, {"T", T}, {"N", N}, {"lattice", lat},
                  {"gauge", base.gauge.name()}, {"tolerance", pc.tolerance}};
        try {
          const cplx exact = smeared_oracle(gf, g0, T, cfg.params);
          const auto lad = smeared_compose_ladder(base, wf, w0, N, opt);
          const double dev = std::abs(lad.extrapolated - exact) / std::abs(exact);
          s["exact"] = cjson(exact);
          s["composed"] = cjson(lad.extrapolated);
          s["deviation"] = dev;
          s["pass"] = dev < pc.tolerance;
          if (prev >= 0) s["improved"] = dev < prev;
          prev = dev;
          tolerance_fail = tolerance_fail || !(dev < pc.tolerance);
          log << "T=" << T << " N=" << N << " deviation " << dev << '\n';
        } catch (const Error& ex) {
          s["error"] = error_name(ex);
          s["message"] = ex.what();
          if (dynamic_cast<const DomainError*>(&ex)) domain_error = true;
        }
        f << s.dump() << '\n';
      }

      if (pc.sectors) {
        json s = {{"schema", 1}, {"record", "sector_fit"}, {"T", T}, {"lattice", lat}};
        try {
          const cplx Tc(T, -base.epsilon / cfg.params.omega);
          const auto box = smeared_sectors(gf, g0, Tc, base.lattice.lambda[0], cfg.params);
          std::vector<SectorValue> kept;
          for (const auto& v : box.sectors) {
            if (std::abs(v.w) > pc.wmax) continue;
            kept.push_back(v);
            f << json{{"schema", 1}, {"record", "sector"}, {"T", T}, {"lattice", lat}, {"w", v.w},
                      {"re", v.value.real()}, {"im", v.value.imag()}, {"abs", std::abs(v.value)}}
                     .dump()
              << '\n';
          }
          const auto [c, loga] = gaussian_fit(kept);
          s["fit_c"] = c;
          s["fit_log_a"] = loga;
          s["total_minus_mehler"] = std::abs(box.total - box.mehler);
        } catch (const Error& ex) {
          s["error"] = error_name(ex);
          s["message"] = ex.what();
          if (dynamic_cast<const DomainError*>(&ex)) domain_error = true;
        }
        f << s.dump() << '\n';
      }
    }
  }
  if (single && domain_error) return kExitDomain;
  return tolerance_fail ? kExitTolerance : kExitOk;
}

int cmd_dynamics(const RunConfig& cfg, std::ostream& log) {
  require_d1(cfg, "dynamics");
  const auto& dc = cfg.dynamics;
  const AmplitudeRequest req = cfg.request(dc.T, scale_ladder(cfg).front());
  const PhasePoint X0(dc.X0[0], dc.X0[1]), Xf(dc.Xf[0], dc.Xf[1]);
  const TrajectoryW tr =
      stationary_path(X0, Xf, LatticeVector(dc.W[0], dc.W[1], req.lattice), 0.0, dc.T, cfg.params);
  auto f = open_out(cfg, "dynamics.csv");
  f << "schema,t,x,xt,chi_x,chi_xt,E,kappa,hj_residual\n";
  double hj_worst = 0;
  for (int i = 0; i <= dc.samples; ++i) {
    const double t = dc.T * i / dc.samples;
    const PhasePoint X = tr(t);
    const CurrentReport c = noether_currents(tr, t);
    f << 1 << ',' << t << ',' << X.x[0] << ',' << X.xt[0] << ',' << c.chi_current.x[0] << ','
      << c.chi_current.xt[0] << ',' << c.energy << ',' << c.kappa << ',';
    // S(X, t) is singular at t = 0 and at resonant times; those cells stay empty
    if (i > 0) {
      try {
        const HJReport h = hamilton_jacobi_residual(X, t, X0, 0.0, cfg.params, cfg.gauge);
        const double r = std::abs(h.residual) / h.energy_scale;
        hj_worst = std::max(hj_worst, r);
        f << r;
      } catch (const DomainError&) {
      }
    }
    f << '\n';
  }
  const CurrentDrift d = current_drift(tr, dc.samples);
  log << "drift chi " << d.chi << " energy " << d.energy << " kappa " << d.kappa
      << "; max HJ residual " << hj_worst << '\n';
  return d.max() < dc.tolerance && hj_worst < 1e-8 ? kExitOk : kExitTolerance;
}

int cmd_legendre(const RunConfig& cfg, std::ostream& log) {
  const PhysicalParams& p = cfg.params;
  const bool oscillator = !cfg.legendre.M;
  const QuadraticHamiltonian H = oscillator ? QuadraticHamiltonian::oscillator(p) : QuadraticHamiltonian{*cfg.legendre.M};
  const double tol = cfg.legendre.tolerance;
  std::vector<Gauge> gauges{Gauge::zero(), Gauge::schrodinger(), Gauge::momentum()};
  if (cfg.gauge.kind == Gauge::Kind::Custom) gauges.push_back(cfg.gauge);

  auto fk = open_out(cfg, "legendre_kin.csv");
  auto fs = open_out(cfg, "legendre.csv");
  fk << "schema,gauge,row,col,kin\n";
  fs << "schema,gauge,roundtrip,eom_residual,kin_minus_G_over_omega\n";
  const Mat target = metric_G(p) / p.omega;
  const Mat w = omega_matrix(p.dims);
  bool ok = true;
  for (const auto& g : gauges) {
    const ModularLagrangian L = modular_legendre(H, g, p);
    for (int i = 0; i < L.kinetic.rows(); ++i)
      for (int j = 0; j < L.kinetic.cols(); ++j)
        fk << 1 << ',' << g.name() << ',' << i << ',' << j << ',' << L.kinetic(i, j) << '\n';
    const double rt = roundtrip_check(H, g, p);
    const double eom = (euler_lagrange_matrix(L) - w.inverse() * H.M).cwiseAbs().maxCoeff() /
                       std::max(1.0, H.M.cwiseAbs().maxCoeff());
    const double kin = (L.kinetic - target).cwiseAbs().maxCoeff();
    fs << 1 << ',' << g.name() << ',' << rt << ',' << eom << ',' << kin << '\n';
    log << g.name() << ": round trip " << rt << ", EOM " << eom << ", |Kin - G/Omega| " << kin << '\n';
    ok = ok && rt < tol && eom < tol && (!oscillator || kin < tol);
  }
  return ok ? kExitOk : kExitTolerance;
}

int cmd_limit(const RunConfig& cfg, std::ostream& log) {
  require_d1(cfg, "limit");
  const GaussianState g0 = GaussianState::coherent(cfg.z0, cfg.params);
  const GaussianState gf = GaussianState::coherent(cfg.zf, cfg.params);
  const LimitScan scan = schrodinger_limit_scan(g0, gf, cfg.limit.T, cfg.limit.ladder, cfg.params);
  auto f = open_out(cfg, "limit.csv");
  f << "schema,lambda,modular_re,modular_im,mehler_re,mehler_im,total_diff,w0_diff,share,offsector,zak_error\n";
  for (const auto& r : scan.rows)
    f << 1 << ',' << r.lambda << ',' << r.modular.real() << ',' << r.modular.imag() << ','
      << r.mehler.real() << ',' << r.mehler.imag() << ',' << r.total_diff << ',' << r.w0_diff << ','
      << r.share << ',' << r.offsector << ',' << r.zak_error << '\n';
  auto s = open_out(cfg, "limit_fit.csv");
  s << "schema,fit_c,fit_log_a,share_monotone,w0_diff_decreasing,zak_decreasing\n";
  s << 1 << ',' << scan.fit_c << ',' << scan.fit_log_a << ',' << scan.share_monotone << ','
    << scan.w0_diff_decreasing << ',' << scan.zak_decreasing << '\n';
  log << "fit c " << scan.fit_c << ", share monotone " << scan.share_monotone
      << ", w=0 difference decreasing " << scan.w0_diff_decreasing << ", Zak error decreasing "
      << scan.zak_decreasing << '\n';
  const bool ok = scan.fit_c > 0 && scan.share_monotone && scan.w0_diff_decreasing && scan.zak_decreasing;
  return ok ? kExitOk : kExitTolerance;
}

}  // namespace modpi
