#include "modpi/phasespace.hpp"

#include <cmath>

namespace modpi {

void PhysicalParams::validate() const {
  if (!(hbar > 0) || !(mass > 0) || !(omega > 0) || !std::isfinite(hbar) ||
      !std::isfinite(mass) || !std::isfinite(omega))
    throw InvalidParams("hbar, mass and omega must be finite and positive");
  if (dims < 1) throw InvalidParams("dims must be >= 1");
}

PhasePoint::PhasePoint(Vec x_, Vec xt_) : x(std::move(x_)), xt(std::move(xt_)) {
  if (x.size() != xt.size()) throw DimensionMismatch("x and xt differ in length");
}

Vec PhasePoint::stacked() const {
  Vec v(2 * dim());
  v << x, xt;
  return v;
}

PhasePoint PhasePoint::unstack(const Vec& v) {
  if (v.size() % 2) throw DimensionMismatch("odd stacked length");
  const auto d = v.size() / 2;
  return {v.head(d), v.tail(d)};
}

void require_same_dim(const PhasePoint& X, const PhasePoint& Y) {
  if (X.dim() != Y.dim()) throw DimensionMismatch("phase points of different dimension");
}

PhasePoint PhasePoint::operator+(const PhasePoint& o) const {
  require_same_dim(*this, o);
  return {x + o.x, xt + o.xt};
}

PhasePoint PhasePoint::operator-(const PhasePoint& o) const {
  require_same_dim(*this, o);
  return {x - o.x, xt - o.xt};
}

ModularLattice::ModularLattice(Vec lambda_, Vec lambda_tilde_, const PhysicalParams& p)
    : lambda(std::move(lambda_)), lambda_tilde(std::move(lambda_tilde_)) {
  validate(p);
}

ModularLattice ModularLattice::from_lambda(const Vec& lambda, const PhysicalParams& p) {
  Vec lt = (2 * kPi * p.hbar) * lambda.cwiseInverse();
  return {lambda, lt, p};
}

ModularLattice ModularLattice::from_lambda(double lambda, const PhysicalParams& p) {
  return from_lambda(Vec::Constant(p.dims, lambda), p);
}

ModularLattice ModularLattice::symmetric(const PhysicalParams& p, double scale) {
  return from_lambda(scale * std::sqrt(2 * kPi * p.hbar / p.mw()), p);
}

void ModularLattice::validate(const PhysicalParams& p) const {
  if (lambda.size() != lambda_tilde.size() || lambda.size() == 0)
    throw DimensionMismatch("lattice scales differ in length");
  if (lambda.size() != p.dims) throw DimensionMismatch("lattice dimension differs from dims");
  const double area = 2 * kPi * p.hbar;
  for (int i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0) || !(lambda_tilde[i] > 0))
      throw InvalidParams("lattice scales must be positive");
    if (std::abs(lambda[i] * lambda_tilde[i] - area) > 1e-15 * area * 4)
      throw InvalidParams("lattice violates lambda * lambda_tilde = 2 pi hbar");
  }
}

Mat ModularLattice::bar() const {
  Vec d(2 * dim());
  d << lambda, lambda_tilde;
  return d.asDiagonal();
}

double ModularLattice::cell_volume() const { return lambda.prod() * lambda_tilde.prod(); }

bool ModularLattice::operator==(const ModularLattice& o) const {
  return lambda.size() == o.lambda.size() && lambda == o.lambda && lambda_tilde == o.lambda_tilde;
}

LatticeVector::LatticeVector(IVec n_, IVec nt_, ModularLattice lat)
    : n(std::move(n_)), nt(std::move(nt_)), lattice(std::move(lat)) {
  if (n.size() != nt.size() || n.size() != lattice.dim())
    throw DimensionMismatch("lattice vector and lattice differ in dimension");
}

LatticeVector::LatticeVector(int n1, int nt1, ModularLattice lat)
    : LatticeVector(IVec::Constant(1, n1), IVec::Constant(1, nt1), std::move(lat)) {}

LatticeVector LatticeVector::zero(const ModularLattice& lat) {
  return {IVec::Zero(lat.dim()), IVec::Zero(lat.dim()), lat};
}

PhasePoint LatticeVector::embed() const {
  return {lattice.lambda.cwiseProduct(n.cast<double>()),
          lattice.lambda_tilde.cwiseProduct(nt.cast<double>())};
}

LatticeVector LatticeVector::operator+(const LatticeVector& o) const {
  if (!(lattice == o.lattice)) throw LatticeMismatch("adding vectors of different lattices");
  return {n + o.n, nt + o.nt, lattice};
}

Gauge Gauge::parse(const std::string& s) {
  if (s == "zero") return zero();
  if (s == "schrodinger") return schrodinger();
  if (s == "momentum") return momentum();
  if (s.rfind("custom:", 0) == 0) return custom(std::stod(s.substr(7)));
  throw InvalidParams("unknown gauge '" + s + "'");
}

double Gauge::coeff(double hbar) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Schrodinger: return -0.5 / hbar;
    case Kind::Momentum: return 0.5 / hbar;
    case Kind::Custom: return c;
  }
  return 0.0;
}

double Gauge::alpha(const PhasePoint& X, double hbar) const { return coeff(hbar) * X.x.dot(X.xt); }

Vec Gauge::grad(const PhasePoint& X, double hbar) const {
  const double k = coeff(hbar);
  Vec g(2 * X.dim());
  g << k * X.xt, k * X.x;
  return g;
}

std::string Gauge::name() const {
  switch (kind) {
    case Kind::Zero: return "zero";
    case Kind::Schrodinger: return "schrodinger";
    case Kind::Momentum: return "momentum";
    case Kind::Custom: return "custom:" + std::to_string(c);
  }
  return "?";
}

Mat omega_matrix(int d) {
  Mat w = Mat::Zero(2 * d, 2 * d);
  w.topRightCorner(d, d) = -Mat::Identity(d, d);
  w.bottomLeftCorner(d, d) = Mat::Identity(d, d);
  return w;
}

Mat metric_G(const PhysicalParams& p) {
  const int d = p.dims;
  Vec diag(2 * d);
  diag << Vec::Constant(d, p.mw()), Vec::Constant(d, 1.0 / p.mw());
  return diag.asDiagonal();
}

Mat metric_eta(int d) {
  Mat e = Mat::Zero(2 * d, 2 * d);
  e.topRightCorner(d, d) = Mat::Identity(d, d);
  e.bottomLeftCorner(d, d) = Mat::Identity(d, d);
  return e;
}

Geometry Geometry::make(const PhysicalParams& p) {
  p.validate();
  return {omega_matrix(p.dims), metric_G(p), metric_eta(p.dims)};
}

Mat Geometry::J() const { return omega.inverse() * G; }

double symplectic(const PhasePoint& X, const PhasePoint& Y) {
  require_same_dim(X, Y);
  return X.xt.dot(Y.x) - X.x.dot(Y.xt);
}

double metric(const PhasePoint& X, const PhasePoint& Y, const PhysicalParams& p) {
  require_same_dim(X, Y);
  return p.mw() * X.x.dot(Y.x) + X.xt.dot(Y.xt) / p.mw();
}

double eta_form(const PhasePoint& X, const PhasePoint& Y) {
  require_same_dim(X, Y);
  return X.xt.dot(Y.x) + X.x.dot(Y.xt);
}

Vec connection(const PhasePoint& X, const Gauge& g, const PhysicalParams& p) {
  Vec a(2 * X.dim());
  a << 0.5 * X.xt, -0.5 * X.x;  // 1/2 omega^T X
  return a + p.hbar * g.grad(X, p.hbar);
}

double beta_phase(const PhasePoint& X, const PhasePoint& K, const Gauge& g,
                  const PhysicalParams& p) {
  const double h = p.hbar;
  return g.alpha(X + K, h) - g.alpha(X, h) + K.x.dot(K.xt) / (2 * h) + symplectic(K, X) / (2 * h);
}

double beta_phase(const PhasePoint& X, const LatticeVector& K, const Gauge& g,
                  const PhysicalParams& p) {
  return beta_phase(X, K.embed(), g, p);
}

std::pair<PhasePoint, LatticeVector> reduce_to_cell(const PhasePoint& X,
                                                    const ModularLattice& lat) {
  if (X.dim() != lat.dim()) throw DimensionMismatch("point and lattice differ in dimension");
  const int d = X.dim();
  IVec n(d), nt(d);
  PhasePoint X0(d);
  for (int i = 0; i < d; ++i) {
    n[i] = static_cast<int>(std::floor(X.x[i] / lat.lambda[i] + 0.5));
    nt[i] = static_cast<int>(std::floor(X.xt[i] / lat.lambda_tilde[i] + 0.5));
    X0.x[i] = X.x[i] - n[i] * lat.lambda[i];
    X0.xt[i] = X.xt[i] - nt[i] * lat.lambda_tilde[i];
    // Rounding in the subtraction can land a hair outside [-1/2, 1/2).
    if (X0.x[i] >= 0.5 * lat.lambda[i]) { ++n[i]; X0.x[i] -= lat.lambda[i]; }
    if (X0.xt[i] >= 0.5 * lat.lambda_tilde[i]) { ++nt[i]; X0.xt[i] -= lat.lambda_tilde[i]; }
  }
  return {X0, LatticeVector(n, nt, lat)};
}

}  // namespace modpi
