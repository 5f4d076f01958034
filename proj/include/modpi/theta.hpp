#pragma once
#include <vector>

#include "modpi/parallel.hpp"
#include "modpi/phasespace.hpp"

namespace modpi {

// Complex symmetric D x D matrix with positive-definite imaginary part.
class SiegelMatrix {
 public:
  explicit SiegelMatrix(CMat tau);
  SiegelMatrix(cplx tau1) : SiegelMatrix(CMat::Constant(1, 1, tau1)) {}

  const CMat& tau() const { return tau_; }
  int dim() const { return static_cast<int>(tau_.rows()); }
  double mu_min() const { return mu_min_; }
  bool diagonal() const { return diagonal_; }

 private:
  CMat tau_;
  double mu_min_ = 0;
  bool diagonal_ = false;
};

struct ThetaTruncation {
  double tail_tol = 1e-14;
  int max_radius = 64;
};

struct ThetaValue {
  cplx value;
  double mass = 0;  // sum of |terms| kept; the tail is certified relative to max(1, mass)
  int radius = 0;
};

// theta(z, tau) = sum_n exp(i pi n^T tau n + 2 pi i n^T z) over Z^D.
// The box is centred on the dominant term round(-(Im tau)^-1 Im z).
ThetaValue theta_eval(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr = {},
                      Exec ex = Exec::Parallel);
cplx theta(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr = {});
cplx theta1(cplx z, cplx tau, const ThetaTruncation& tr = {});

// Smallest box radius whose Gaussian tail bound meets tr.tail_tol.
int certified_radius(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr);

// Principal branch: product of principal roots of the eigenvalues of -i tau.
cplx sqrt_det_minus_i(const CMat& tau);

// det(-i tau)^{1/2} exp(i pi z^T tau^-1 z) theta(z, tau); equals
// theta(tau^-1 z, -tau^-1) without ever summing that series.
cplx theta_inverted(const CVec& z, const SiegelMatrix& tau, const ThetaTruncation& tr = {});

// theta(z, xi) summed through the inversion identity:
// det(-i xi)^{-1/2} exp(-i pi (z-m)^T xi^-1 (z-m)) theta(xi^-1 (z-m), -xi^-1),
// with m the dominant index, so nothing overflows when Im xi is small.
ThetaValue theta_dual(const CVec& z, const SiegelMatrix& xi, const ThetaTruncation& tr = {});

// Scalar version for hot loops; everything depending on xi alone is done once.
// The radius is certified for the worst offset of the dominant term.
class DualTheta1 {
 public:
  explicit DualTheta1(cplx xi, const ThetaTruncation& tr = {});
  cplx operator()(cplx z) const;
  int radius() const { return R_; }

 private:
  cplx xi_inv_, tp_, pre_;
  double mu_ = 0;
  int R_ = 0;
};

struct LemmaAux {
  IVec m;             // lemmas 1, 2
  Eigen::MatrixXi A;  // lemma 3, unimodular
  Eigen::MatrixXi B;  // lemma 4, symmetric with even diagonal
  double a = 0;       // lemma 6
};

// Scaled residual |L - R| / max(1, |L|, |R|); lemma 6 returns |theta(z, a tau) - 1|.
double check_lemma(int lemma_id, const CVec& z, const SiegelMatrix& tau, const LemmaAux& aux,
                   const ThetaTruncation& tr = {});

// All six lemmas at `points` seeded random (z, tau). Re tau, Re z uniform in (-1, 1),
// Im tau = B B^T + 0.4, Im z in (-0.6, 0.6); lemma 6 at Re z. A fixed tau replaces
// the random one when given (validated, so a bad one throws NotSiegel).
struct LemmaRow {
  int D = 1;
  int point = 0;
  double residual[6] = {};
};
std::vector<LemmaRow> lemma_sweep(int D, int points, unsigned long long seed,
                                  const CMat* fixed_tau = nullptr, const ThetaTruncation& tr = {});

}  // namespace modpi
