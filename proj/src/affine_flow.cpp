#include "wishartlab/affine_flow.hpp"

#include <array>
#include <cmath>

namespace wishartlab {

namespace {

void check_time(double t, const char* who) {
  if (!std::isfinite(t) || t < 0.0) {
    raise(errc::invalid_params,
          std::string(who) + ": time must be finite and >= 0, got " +
              std::to_string(t));
  }
}

// Integrand e^{beta s} alpha e^{beta^T s}, accumulated by composite
// Gauss-Legendre panels that are refined until two successive levels agree.
Matrix sigma_flow_quadrature(const Matrix& beta, const Matrix& alpha,
                             double t) {
  // 10-point Gauss-Legendre nodes/weights on [-1, 1].
  static const std::array<double, 5> xs = {
      0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
      0.8650633666889845, 0.9739065285171717};
  static const std::array<double, 5> ws = {
      0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
      0.1494513491505806, 0.0666713443086881};

  auto integrate = [&](int panels) {
    Matrix acc = Matrix::Zero(beta.rows(), beta.cols());
    const double h = t / panels;
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double mid = (pnl + 0.5) * h;
      for (int k = 0; k < 5; ++k) {
        for (double sgn : {-1.0, 1.0}) {
          const double s = mid + sgn * 0.5 * h * xs[k];
          const Matrix e = matrix_exp(beta * s);
          acc += (0.5 * h * ws[k]) * (e * alpha * e.transpose());
        }
      }
    }
    return Matrix(2.0 * acc);
  };

  Matrix coarse = integrate(1);
  for (int panels = 2; panels <= 64; panels *= 2) {
    Matrix fine = integrate(panels);
    const double scale = std::max(1.0, fine.cwiseAbs().maxCoeff());
    if ((fine - coarse).cwiseAbs().maxCoeff() <= 1e-13 * scale) {
      return fine;
    }
    coarse = std::move(fine);
  }
  return coarse;
}

}  // namespace

PsdMatrix omega_flow(const Matrix& beta, const PsdMatrix& x, double t) {
  if (beta.rows() != x.dim()) {
    raise(errc::shape_error, "omega_flow: beta and x dimensions differ");
  }
  if (!std::isfinite(t)) {
    raise(errc::invalid_params, "omega_flow: time must be finite");
  }
  const Matrix e = matrix_exp(beta * t);
  return PsdMatrix::trusted(e * x.mat() * e.transpose());
}

PsdMatrix sigma_flow(const Matrix& beta, const PsdMatrix& alpha, double t) {
  check_time(t, "sigma_flow");
  if (beta.rows() != alpha.dim()) {
    raise(errc::shape_error, "sigma_flow: beta and alpha dimensions differ");
  }
  const Eigen::Index d = beta.rows();
  if (t == 0.0) return PsdMatrix::zero(d);

  // Van Loan block trick: exp([[beta, alpha], [0, -beta^T]] t) has upper
  // right block G = H(t) e^{-beta^T t} with H(t) the target integral, so
  // H(t) = G F11^T where F11 = e^{beta t}.
  Matrix aug = Matrix::Zero(2 * d, 2 * d);
  aug.topLeftCorner(d, d) = beta;
  aug.topRightCorner(d, d) = alpha.mat();
  aug.bottomRightCorner(d, d) = -beta.transpose();
  const Matrix e = matrix_exp(aug * t);
  const Matrix primary =
      2.0 * e.topRightCorner(d, d) * e.topLeftCorner(d, d).transpose();

  const Matrix check = sigma_flow_quadrature(beta, alpha.mat(), t);
  const double scale =
      std::max({1e-300, primary.cwiseAbs().maxCoeff(), check.cwiseAbs().maxCoeff()});
  const double diff = (primary - check).cwiseAbs().maxCoeff() / scale;
  if (diff > 1e-8) {
    raise(errc::quadrature_divergence,
          "sigma_flow routes disagree by relative " + std::to_string(diff));
  }
  return PsdMatrix::trusted(primary);
}

FlowPair flow_pair(const ProcessParams& process, double t, const PsdMatrix& u) {
  check_time(t, "flow_pair");
  const Eigen::Index d = process.dim();
  if (u.dim() != d) {
    raise(errc::shape_error, "flow_pair: u dimension mismatch");
  }

  const PsdMatrix st = sigma_flow(process.beta, process.alpha, t);

  // phi through the symmetrized resolvent: det(I + u sigma_t) equals
  // det(I + S u S) with S = sqrt(sigma_t), which is safely PD.
  const Matrix s_half = sqrt_psd(st).mat();
  const Matrix m_phi = Matrix::Identity(d, d) +
                       ((s_half * u.mat() * s_half).eval() +
                        (s_half * u.mat() * s_half).transpose().eval()) /
                           2.0;
  const double phi = process.p * logdet_pd(m_phi, errc::singular_resolvent,
                                           "I + sqrt(sigma_t) u sqrt(sigma_t)");

  // psi core u (I + sigma_t u)^{-1} in the congruence form
  // R (I + R sigma_t R)^{-1} R with R = sqrt(u); exact for singular u.
  const Matrix r = sqrt_psd(u).mat();
  Matrix m_psi = Matrix::Identity(d, d) + r * st.mat() * r;
  m_psi = (m_psi + m_psi.transpose()) / 2.0;
  Eigen::LLT<Matrix> llt(m_psi);
  if (llt.info() != Eigen::Success) {
    raise(errc::singular_resolvent,
          "I + sqrt(u) sigma_t sqrt(u) is not positive definite");
  }
  const Matrix core = r * llt.solve(r);
  const Matrix ebt = matrix_exp(process.beta * t);
  return {phi, PsdMatrix::trusted(ebt.transpose() * core * ebt)};
}

double transition_laplace(const ProcessParams& process, double t,
                          const PsdMatrix& u, const PsdMatrix& x) {
  if (x.dim() != process.dim()) {
    raise(errc::shape_error, "transition_laplace: x dimension mismatch");
  }
  const FlowPair fp = flow_pair(process, t, u);
  const double tr = (fp.psi.mat() * x.mat()).trace();
  return std::exp(-fp.phi - tr);
}

double generator_on_exponential(const ProcessParams& process,
                                const PsdMatrix& u, const PsdMatrix& x) {
  const Eigen::Index d = process.dim();
  if (u.dim() != d || x.dim() != d) {
    raise(errc::shape_error, "generator_on_exponential: dimension mismatch");
  }
  const Matrix& a = process.alpha.mat();
  const Matrix& xm = x.mat();
  const Matrix& um = u.mat();
  const double f = std::exp(-(um * xm).trace());

  // Second-order part over all d^4 coordinates; with f_u the Hessian entry
  // d^2 f / dx_ij dx_kl is f * u_ij u_kl.
  double quad = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) {
          const double a_ijkl = xm(i, k) * a(j, l) + xm(i, l) * a(j, k) +
                                xm(j, k) * a(i, l) + xm(j, l) * a(i, k);
          quad += a_ijkl * um(i, j) * um(k, l);
        }

  const Matrix drift =
      process.beta * xm + xm * process.beta.transpose() + 2.0 * process.p * a;
  const double first = -f * (drift * um).trace();
  return 0.5 * f * quad + first;
}

}  // namespace wishartlab
