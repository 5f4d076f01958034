#pragma once
#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>

#include "modpi/errors.hpp"

namespace modpi {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using IVec = Eigen::VectorXi;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

struct PhysicalParams {
  double hbar = 1.0;
  double mass = 1.0;
  double omega = 1.0;
  int dims = 1;

  void validate() const;
  double mw() const { return mass * omega; }
};

// A point (x, x~) of phase space. Stacked form is (x_1..x_d, xt_1..xt_d).
struct PhasePoint {
  Vec x;
  Vec xt;

  PhasePoint() : PhasePoint(1) {}
  explicit PhasePoint(int d) : x(Vec::Zero(d)), xt(Vec::Zero(d)) {}
  PhasePoint(double x1, double xt1) : x(Vec::Constant(1, x1)), xt(Vec::Constant(1, xt1)) {}
  PhasePoint(Vec x_, Vec xt_);

  int dim() const { return static_cast<int>(x.size()); }
  Vec stacked() const;
  static PhasePoint unstack(const Vec& v);
  bool finite() const { return x.allFinite() && xt.allFinite(); }

  PhasePoint operator+(const PhasePoint& o) const;
  PhasePoint operator-(const PhasePoint& o) const;
  PhasePoint operator-() const { return {-x, -xt}; }
  PhasePoint operator*(double s) const { return {x * s, xt * s}; }
};

inline PhasePoint operator*(double s, const PhasePoint& p) { return p * s; }

// Diagonal modular lattice with lambda_i * lambda_tilde_i = 2 pi hbar.
struct ModularLattice {
  Vec lambda;
  Vec lambda_tilde;

  ModularLattice() = default;
  ModularLattice(Vec lambda_, Vec lambda_tilde_, const PhysicalParams& p);
  // lambda_tilde fixed by the area condition.
  static ModularLattice from_lambda(const Vec& lambda, const PhysicalParams& p);
  static ModularLattice from_lambda(double lambda, const PhysicalParams& p);
  // lambda = scale * sqrt(2 pi hbar / m Omega): G(K,K)/2hbar = pi |n|^2 at scale 1.
  static ModularLattice symmetric(const PhysicalParams& p, double scale = 1.0);

  int dim() const { return static_cast<int>(lambda.size()); }
  void validate(const PhysicalParams& p) const;
  // Lambda-bar = diag(lambda, lambda_tilde), 2d x 2d.
  Mat bar() const;
  double cell_volume() const;
  bool operator==(const ModularLattice& o) const;
};

struct LatticeVector {
  IVec n;
  IVec nt;
  ModularLattice lattice;

  LatticeVector() = default;
  LatticeVector(IVec n_, IVec nt_, ModularLattice lat);
  LatticeVector(int n1, int nt1, ModularLattice lat);
  static LatticeVector zero(const ModularLattice& lat);
  PhasePoint embed() const;
  LatticeVector operator+(const LatticeVector& o) const;
};

// alpha(X) = c x.xt. Zero, Schrodinger and Momentum are c = 0, -1/2hbar, +1/2hbar.
struct Gauge {
  enum class Kind { Zero, Schrodinger, Momentum, Custom };
  Kind kind = Kind::Zero;
  double c = 0.0;  // only read for Custom

  static Gauge zero() { return {Kind::Zero, 0.0}; }
  static Gauge schrodinger() { return {Kind::Schrodinger, 0.0}; }
  static Gauge momentum() { return {Kind::Momentum, 0.0}; }
  static Gauge custom(double c) { return {Kind::Custom, c}; }
  static Gauge parse(const std::string& s);

  double coeff(double hbar) const;
  double alpha(const PhasePoint& X, double hbar) const;
  Vec grad(const PhasePoint& X, double hbar) const;
  std::string name() const;
  bool operator==(const Gauge& o) const { return kind == o.kind && (kind != Kind::Custom || c == o.c); }
};

struct Geometry {
  Mat omega;  // omega(X,Y) = X^T omega Y = xt.y - x.yt
  Mat G;      // diag(m Omega, 1/(m Omega))
  Mat eta;    // eta(X,Y) = xt.y + x.yt

  static Geometry make(const PhysicalParams& p);
  // omega^{-1} G, the complex structure: J^2 = -1.
  Mat J() const;
};

Mat omega_matrix(int d);
Mat metric_G(const PhysicalParams& p);
Mat metric_eta(int d);

double symplectic(const PhasePoint& X, const PhasePoint& Y);
double metric(const PhasePoint& X, const PhasePoint& Y, const PhysicalParams& p);
double eta_form(const PhasePoint& X, const PhasePoint& Y);

// A_A(X) = 1/2 X^B omega_BA + hbar d_A alpha, stacked (x-part, xt-part).
Vec connection(const PhasePoint& X, const Gauge& g, const PhysicalParams& p);

// alpha(X+K) - alpha(X) + k.kt/2hbar + omega(K,X)/2hbar
double beta_phase(const PhasePoint& X, const LatticeVector& K, const Gauge& g,
                  const PhysicalParams& p);
double beta_phase(const PhasePoint& X, const PhasePoint& K, const Gauge& g,
                  const PhysicalParams& p);

// X = X0 + K with X0 in the half-open centred cell; ties at +1/2 go to -1/2.
std::pair<PhasePoint, LatticeVector> reduce_to_cell(const PhasePoint& X,
                                                    const ModularLattice& lat);

void require_same_dim(const PhasePoint& X, const PhasePoint& Y);

}  // namespace modpi
