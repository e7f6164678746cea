#pragma once

#include <Eigen/Dense>

#include "wishartlab/errors.hpp"

namespace wishartlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Default tolerances used across the library.
constexpr double kSymTol = 1e-12;       // admissible relative asymmetry
constexpr double kPsdEigFloor = 1e-10;  // admissible negative eigenvalue dip
constexpr double kRankRelTol = 1e-10;   // rank cut relative to largest |eig|

// Symmetric matrix with exactly symmetric storage. Construction either
// validates the input (from) or symmetrizes unconditionally (symmetrized).
class SymMatrix {
 public:
  SymMatrix() : m_(0, 0) {}

  // Validates squareness, finiteness and symmetry up to sym_tol (relative to
  // the largest entry), then stores the exactly symmetrized matrix.
  static SymMatrix from(const Matrix& a, double sym_tol = kSymTol);

  // Stores (a + a^T)/2 without an asymmetry check.
  static SymMatrix symmetrized(const Matrix& a);

  static SymMatrix zero(Eigen::Index d) { return SymMatrix(Matrix::Zero(d, d)); }
  static SymMatrix identity(Eigen::Index d) {
    return SymMatrix(Matrix::Identity(d, d));
  }

  const Matrix& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  friend class PsdMatrix;
  explicit SymMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

// Positive semidefinite matrix. `validated` enforces the eigenvalue floor
// (smallest eigenvalue >= -eig_floor * (1 + |largest|)) and clamps the
// stored matrix onto the cone; `trusted` skips the check for matrices that
// are PSD by construction (congruences, outer products, projections).
class PsdMatrix {
 public:
  PsdMatrix() = default;

  static PsdMatrix validated(const SymMatrix& a, double eig_floor = kPsdEigFloor);
  static PsdMatrix validated(const Matrix& a, double sym_tol = kSymTol,
                             double eig_floor = kPsdEigFloor) {
    return validated(SymMatrix::from(a, sym_tol), eig_floor);
  }
  static PsdMatrix trusted(Matrix a) {
    return PsdMatrix(SymMatrix::symmetrized(std::move(a)));
  }

  static PsdMatrix zero(Eigen::Index d) { return PsdMatrix(SymMatrix::zero(d)); }
  static PsdMatrix identity(Eigen::Index d) {
    return PsdMatrix(SymMatrix::identity(d));
  }

  const Matrix& mat() const { return s_.mat(); }
  const SymMatrix& sym() const { return s_; }
  Eigen::Index dim() const { return s_.dim(); }

 private:
  explicit PsdMatrix(SymMatrix s) : s_(std::move(s)) {}
  SymMatrix s_;
};

// Symmetric PSD square root via eigendecomposition, r r = a up to rounding.
PsdMatrix sqrt_psd(const PsdMatrix& a);

// Matrix exponential of a general square matrix (scaling-and-squaring Pade).
Matrix matrix_exp(const Matrix& m);

struct PsdProjection {
  PsdMatrix projected;
  double min_eig;  // smallest eigenvalue of the input, before clipping
};

// Nearest (Frobenius) PSD matrix, obtained by clipping negative eigenvalues.
PsdProjection psd_project(const SymMatrix& a);

// Numerical rank: number of eigenvalues with |eig| > rel_tol * max|eig|.
int rank_tol(const SymMatrix& a, double rel_tol = kRankRelTol);

// Rank of a general (possibly rectangular) matrix from its singular values.
int rank_tol_svd(const Matrix& a, double rel_tol = kRankRelTol);

// Spectral norm of a symmetric matrix (largest |eigenvalue|).
double spectral_norm(const SymMatrix& a);

// log det via Cholesky; requires positive definiteness.
// Raises `code` with `what` naming the offending quantity otherwise.
double logdet_pd(const Matrix& a, errc code, const char* what);

}  // namespace wishartlab
