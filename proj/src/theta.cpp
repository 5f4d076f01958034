#include "modpi/theta.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <vector>

namespace modpi {

SiegelMatrix::SiegelMatrix(CMat tau) : tau_(std::move(tau)) {
  if (tau_.rows() != tau_.cols() || tau_.rows() == 0)
    throw DimensionMismatch("tau must be square and non-empty");
  if (!tau_.allFinite()) throw NotSiegel("tau has non-finite entries");
  const double scale = std::max(1.0, tau_.cwiseAbs().maxCoeff());
  if ((tau_ - tau_.transpose()).cwiseAbs().maxCoeff() > 1e-13 * scale)
    throw NotSiegel("tau is not symmetric");
  tau_ = 0.5 * (tau_ + tau_.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(tau_.imag());
  mu_min_ = es.eigenvalues().minCoeff();
  if (!(mu_min_ > 0)) throw NotSiegel("Im tau is not positive definite");
  Mat off = tau_.cwiseAbs();
  off.diagonal().setZero();
  diagonal_ = off.maxCoeff() == 0.0;
}

namespace {

// log of sum_{k>R} [(2k+1)^D - (2k-1)^D] exp(-pi mu (k-1/2)^2), which bounds
// the normalised tail because |n - u| >= ||n - c||_inf - 1/2 for n outside the box.
double log_tail_bound(int R, int D, double mu) {
  double acc = -INFINITY;
  double prev = INFINITY;
  for (int k = R + 1;; ++k) {
    const double shell = std::log(std::pow(2.0 * k + 1, D) - std::pow(2.0 * k - 1, D));
    const double t = shell - kPi * mu * (k - 0.5) * (k - 0.5);
    acc = acc == -INFINITY ? t : std::max(acc, t) + std::log1p(std::exp(-std::abs(acc - t)));
    if (t < prev && t < acc - 46.0) break;
    prev = t;
    if (k > R + 100000) break;
  }
  return acc;
}

struct Box {
  IVec centre;
  int radius = 0;
};

Box plan_box(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr) {
  const int D = tau.dim();
  if (z.size() != D) throw DimensionMismatch("z and tau differ in dimension");
  if (!z.allFinite()) throw DimensionMismatch("z has non-finite entries");
  const Mat Y = tau.tau().imag();
  const Vec u = -Y.llt().solve(z.imag());
  Box b;
  b.centre = u.array().round().cast<int>();
  const Vec delta = b.centre.cast<double>() - u;
  const double lhs_shift = kPi * delta.dot(Y * delta);
  const double target = std::log(tr.tail_tol);
  for (int R = 0; R <= tr.max_radius; ++R) {
    if (log_tail_bound(R, D, tau.mu_min()) + lhs_shift <= target) {
      b.radius = R;
      return b;
    }
  }
  throw TruncationInsufficient("theta tail bound not met within max_radius " +
                               std::to_string(tr.max_radius));
}

struct Acc {
  double re = 0, im = 0, mass = 0;
};

inline cplx term(const IVec& n, const CVec& z, const CMat& tau) {
  const CVec nd = n.cast<double>().cast<cplx>();
  const cplx q = nd.dot(tau * nd);  // nd is real, so the conjugating dot is bilinear
  const cplx l = nd.dot(z);
  return std::exp(kI * kPi * q + 2.0 * kPi * kI * l);
}

// Sum over the box with the first coordinate fixed to c0 + off.
void sum_slab(int off, const Box& b, const CVec& z, const CMat& tau, Acc& a) {
  const int D = static_cast<int>(z.size());
  const int R = b.radius;
  auto add = [&a](cplx t) {
    a.re += t.real();
    a.im += t.imag();
    a.mass += std::abs(t);
  };
  if (D == 1) {
    const double n = b.centre[0] + off;
    add(std::exp(kI * kPi * (tau(0, 0) * n * n + 2.0 * z[0] * n)));
    return;
  }
  if (D == 2) {
    // Scalar fast path: the Gaussian part is a quadratic in the inner index.
    const double n0 = b.centre[0] + off;
    const cplx t00 = tau(0, 0), t01 = tau(0, 1), t11 = tau(1, 1);
    for (int j = -R; j <= R; ++j) {
      const double n1 = b.centre[1] + j;
      const cplx q = t00 * n0 * n0 + 2.0 * t01 * n0 * n1 + t11 * n1 * n1;
      add(std::exp(kI * kPi * (q + 2.0 * (z[0] * n0 + z[1] * n1))));
    }
    return;
  }
  IVec n = b.centre;
  n[0] += off;
  std::vector<int> idx(D - 1, -R);
  while (true) {
    for (int j = 1; j < D; ++j) n[j] = b.centre[j] + idx[j - 1];
    add(term(n, z, tau));
    int j = 0;
    while (j < D - 1 && ++idx[j] > R) idx[j++] = -R;
    if (j == D - 1) break;
  }
}

ThetaValue sum_box(const Box& b, const CVec& z, const SiegelMatrix& tau, Exec ex) {
  const int R = b.radius;
  const CMat& t = tau.tau();
  const long terms = static_cast<long>(std::pow(2.0 * R + 1, tau.dim()));
  double re = 0, im = 0, mass = 0;
  if (ex == Exec::Parallel && terms >= 4096) {
#pragma omp parallel for reduction(+ : re, im, mass) schedule(static)
    for (int off = -R; off <= R; ++off) {
      Acc a;
      sum_slab(off, b, z, t, a);
      re += a.re;
      im += a.im;
      mass += a.mass;
    }
  } else {
    for (int off = -R; off <= R; ++off) {
      Acc a;
      sum_slab(off, b, z, t, a);
      re += a.re;
      im += a.im;
      mass += a.mass;
    }
  }
  return {cplx(re, im), mass, R};
}

}  // namespace

int certified_radius(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr) {
  return plan_box(z, tau, tr).radius;
}

ThetaValue theta_eval(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr, Exec ex) {
  if (tau.diagonal() && tau.dim() > 1) {
    // Diagonal tau factorises into one-dimensional series.
    ThetaTruncation t1 = tr;
    t1.tail_tol = tr.tail_tol / tau.dim();
    ThetaValue out{cplx(1.0), 1.0, 0};
    for (int i = 0; i < tau.dim(); ++i) {
      SiegelMatrix ti(tau.tau()(i, i));
      CVec zi = CVec::Constant(1, z[i]);
      const ThetaValue v = sum_box(plan_box(zi, ti, t1), zi, ti, Exec::Serial);
      out.value *= v.value;
      out.mass *= v.mass;
      out.radius = std::max(out.radius, v.radius);
    }
    return out;
  }
  return sum_box(plan_box(z, tau, tr), z, tau, ex);
}

cplx theta(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr) {
  return theta_eval(z, tau, tr).value;
}

cplx theta1(cplx z, cplx tau, const ThetaTruncation& tr) {
  return theta(CVec::Constant(1, z), SiegelMatrix(tau), tr);
}

cplx sqrt_det_minus_i(const CMat& tau) {
  Eigen::ComplexEigenSolver<CMat> es(-kI * tau);
  cplx r = 1.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) r *= std::sqrt(es.eigenvalues()[i]);
  return r;
}

cplx theta_inverted(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr) {
  const CVec tz = tau.tau().lu().solve(z);
  const cplx q = (z.transpose() * tz)(0, 0);  // bilinear, no conjugation
  return sqrt_det_minus_i(tau.tau()) * std::exp(kI * kPi * q) * theta(z, tau, tr);
}

ThetaValue theta_dual(const CVec& z, const SiegelMatrix& xi, const ThetaTruncation& tr) {
  if (z.size() != xi.dim()) throw DimensionMismatch("z and xi differ in dimension");
  const CMat xinv = xi.tau().inverse();
  const SiegelMatrix dual(-xinv);
  const CVec zp = xinv * z;
  const Vec u = -dual.tau().imag().llt().solve(zp.imag());
  const CVec d = z - u.array().round().matrix().cast<cplx>();
  const cplx q = (d.transpose() * xinv * d)(0, 0);
  ThetaValue v = theta_eval(xinv * d, dual, tr);
  const cplx f = std::exp(-kI * kPi * q) / sqrt_det_minus_i(xi.tau());
  v.value *= f;
  v.mass *= std::abs(f);
  return v;
}

DualTheta1::DualTheta1(cplx xi, const ThetaTruncation& tr) {
  if (!(xi.imag() > 0) || !std::isfinite(std::abs(xi))) throw NotSiegel("Im xi must be positive");
  xi_inv_ = 1.0 / xi;
  tp_ = -xi_inv_;
  mu_ = tp_.imag();
  pre_ = 1.0 / std::sqrt(-kI * xi);
  const double target = std::log(tr.tail_tol);
  for (R_ = 0; R_ <= tr.max_radius; ++R_)
    if (log_tail_bound(R_, 1, mu_) + 0.25 * kPi * mu_ <= target) return;
  throw TruncationInsufficient("dual theta tail bound not met within max_radius");
}

cplx DualTheta1::operator()(cplx z) const {
  // dominant index of the dual series
  const double m = std::round(-(xi_inv_ * z).imag() / mu_);
  const cplx d = z - m;
  const cplx w = xi_inv_ * d;
  const double c = std::round(-w.imag() / mu_);
  cplx s = 0;
  for (int k = -R_; k <= R_; ++k) {
    const double n = c + k;
    s += std::exp(kI * kPi * (tp_ * n * n + 2.0 * w * n));
  }
  return pre_ * std::exp(-kI * kPi * d * d * xi_inv_) * s;
}

namespace {

double scaled(cplx L, cplx R) {
  return std::abs(L - R) / std::max({1.0, std::abs(L), std::abs(R)});
}

}  // namespace

double check_lemma(int id, const CVec& z, const SiegelMatrix& tau, const LemmaAux& aux,
                   const ThetaTruncation& tr) {
  const int D = tau.dim();
  const CMat& t = tau.tau();
  switch (id) {
    case 1: {
      if (aux.m.size() != D) throw BadAux("lemma 1 needs m in Z^D");
      const CVec zm = z + aux.m.cast<double>().cast<cplx>();
      return scaled(theta(zm, tau, tr), theta(z, tau, tr));
    }
    case 2: {
      if (aux.m.size() != D) throw BadAux("lemma 2 needs m in Z^D");
      const CVec m = aux.m.cast<double>().cast<cplx>();
      const cplx mtm = (m.transpose() * t * m)(0, 0);
      const cplx mz = (m.transpose() * z)(0, 0);
      const cplx rhs = std::exp(-kI * kPi * mtm - 2.0 * kPi * kI * mz) * theta(z, tau, tr);
      return scaled(theta(z + t * m, tau, tr), rhs);
    }
    case 3: {
      if (aux.A.rows() != D || aux.A.cols() != D) throw BadAux("lemma 3 needs a D x D matrix");
      const Mat A = aux.A.cast<double>();
      if (std::abs(std::abs(A.determinant()) - 1.0) > 1e-9) throw BadAux("A is not unimodular");
      const CMat Ac = A.cast<cplx>();
      const SiegelMatrix t2(Ac.transpose() * t * Ac);
      return scaled(theta(Ac.transpose() * z, t2, tr), theta(z, tau, tr));
    }
    case 4: {
      if (aux.B.rows() != D || aux.B.cols() != D) throw BadAux("lemma 4 needs a D x D matrix");
      if (aux.B != aux.B.transpose()) throw BadAux("B is not symmetric");
      for (int i = 0; i < D; ++i)
        if (aux.B(i, i) % 2 != 0) throw BadAux("B diagonal is not even");
      const SiegelMatrix t2(t + aux.B.cast<double>().cast<cplx>());
      return scaled(theta(z, t2, tr), theta(z, tau, tr));
    }
    case 5: {
      const CMat ti = t.inverse();
      const SiegelMatrix t2(-ti);
      return scaled(theta(ti * z, t2, tr), theta_inverted(z, tau, tr));
    }
    case 6: {
      if (!(aux.a > 0)) throw BadAux("lemma 6 needs a > 0");
      return std::abs(theta(z, SiegelMatrix(aux.a * t), tr) - 1.0);
    }
    default:
      throw BadAux("lemma id must be 1..6");
  }
}

std::vector<LemmaRow> lemma_sweep(int D, int points, unsigned long long seed,
                                  const CMat* fixed_tau, const ThetaTruncation& tr) {
  if (D < 1 || D > 2) throw UnsupportedDim("lemma sweep covers D = 1, 2");
  if (points < 0) throw InvalidParams("points must be non-negative");
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  LemmaAux aux;
  aux.A = Eigen::MatrixXi::Identity(D, D);
  aux.B = Eigen::MatrixXi::Zero(D, D);
  if (D == 2) {
    aux.A << 2, 1, 1, 1;
    aux.B << 2, -3, -3, 4;
  } else {
    aux.A(0, 0) = -1;
    aux.B(0, 0) = -2;
  }
  std::vector<LemmaRow> rows;
  rows.reserve(points);
  for (int k = 0; k < points; ++k) {
    Mat X(D, D), B(D, D);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j <= i; ++j) X(i, j) = X(j, i) = uni(-1, 1);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) B(i, j) = uni(-0.8, 0.8);
    CMat t = X.cast<cplx>() + kI * (B * B.transpose() + 0.4 * Mat::Identity(D, D)).cast<cplx>();
    if (fixed_tau) {
      if (fixed_tau->rows() != D || fixed_tau->cols() != D) throw DimensionMismatch("tau must be D x D");
      t = *fixed_tau;
    }
    const SiegelMatrix tau(t);
    CVec z(D);
    for (int i = 0; i < D; ++i) z[i] = cplx(uni(-1, 1), uni(-0.6, 0.6));
    aux.m = IVec(D);
    for (int i = 0; i < D; ++i) aux.m[i] = std::uniform_int_distribution<int>(-2, 2)(rng);
    aux.a = 14.0 / tau.mu_min();
    LemmaRow r;
    r.D = D;
    r.point = k;
    for (int L = 1; L <= 5; ++L) r.residual[L - 1] = check_lemma(L, z, tau, aux, tr);
    r.residual[5] = check_lemma(6, z.real().cast<cplx>(), tau, aux, tr);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace modpi
