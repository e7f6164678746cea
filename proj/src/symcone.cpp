#include "wishartlab/symcone.hpp"

#include <cmath>

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace wishartlab {

namespace {

void check_square_finite(const Matrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    raise(errc::shape_error,
          std::string(who) + ": expected a square matrix, got " +
              std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (!a.allFinite()) {
    raise(errc::non_finite, std::string(who) + ": matrix has NaN/Inf entries");
  }
}

}  // namespace

SymMatrix SymMatrix::from(const Matrix& a, double sym_tol) {
  check_square_finite(a, "SymMatrix");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > sym_tol * scale) {
    raise(errc::shape_error,
          "SymMatrix: asymmetry " + std::to_string(asym) +
              " exceeds tolerance " + std::to_string(sym_tol * scale));
  }
  return SymMatrix(((a + a.transpose()) / 2.0).eval());
}

SymMatrix SymMatrix::symmetrized(const Matrix& a) {
  check_square_finite(a, "SymMatrix");
  return SymMatrix(((a + a.transpose()) / 2.0).eval());
}

PsdMatrix PsdMatrix::validated(const SymMatrix& a, double eig_floor) {
  if (a.dim() == 0) return PsdMatrix(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.mat());
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -eig_floor * (1.0 + std::abs(hi))) {
    raise(errc::not_psd, "matrix has eigenvalue " + std::to_string(lo) +
                             " below the PSD floor");
  }
  if (lo >= 0.0) return PsdMatrix(a);
  // Small negative dips inside the floor are clipped so downstream code can
  // rely on the cone membership it was promised.
  Vector clipped = es.eigenvalues().cwiseMax(0.0);
  Matrix m = es.eigenvectors() * clipped.asDiagonal() *
             es.eigenvectors().transpose();
  return PsdMatrix(SymMatrix::symmetrized(m));
}

PsdMatrix sqrt_psd(const PsdMatrix& a) {
  if (a.dim() == 0) return a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.mat());
  Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix r = es.eigenvectors() * roots.asDiagonal() *
             es.eigenvectors().transpose();
  return PsdMatrix::trusted(std::move(r));
}

Matrix matrix_exp(const Matrix& m) {
  check_square_finite(m, "matrix_exp");
  return m.exp();
}

PsdProjection psd_project(const SymMatrix& a) {
  if (a.dim() == 0) return {PsdMatrix::zero(0), 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.mat());
  const double lo = es.eigenvalues().minCoeff();
  if (lo >= 0.0) {
    return {PsdMatrix::trusted(a.mat()), lo};
  }
  Vector clipped = es.eigenvalues().cwiseMax(0.0);
  Matrix m = es.eigenvectors() * clipped.asDiagonal() *
             es.eigenvectors().transpose();
  return {PsdMatrix::trusted(std::move(m)), lo};
}

int rank_tol(const SymMatrix& a, double rel_tol) {
  if (a.dim() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.compute(a.mat(), Eigen::EigenvaluesOnly);
  const Vector abs = es.eigenvalues().cwiseAbs();
  const double top = abs.maxCoeff();
  if (top == 0.0) return 0;
  return static_cast<int>((abs.array() > rel_tol * top).count());
}

int rank_tol_svd(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector sv = svd.singularValues();
  const double top = sv.maxCoeff();
  if (top == 0.0) return 0;
  return static_cast<int>((sv.array() > rel_tol * top).count());
}

double spectral_norm(const SymMatrix& a) {
  if (a.dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.compute(a.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double logdet_pd(const Matrix& a, errc code, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    raise(code, std::string(what) + " is not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace wishartlab
