#include "wishartlab/validity.hpp"

#include <cmath>

#include "wishartlab/affine_flow.hpp"

namespace wishartlab {

WishartParams WishartParams::make(double p, PsdMatrix omega, PsdMatrix sigma) {
  if (!(p >= 0.0) || !std::isfinite(p)) {
    raise(errc::invalid_params, "shape p must be finite and >= 0, got " +
                                    std::to_string(p));
  }
  if (omega.dim() != sigma.dim()) {
    raise(errc::shape_error, "omega and sigma dimensions differ: " +
                                 std::to_string(omega.dim()) + " vs " +
                                 std::to_string(sigma.dim()));
  }
  if (sigma.dim() == 0) {
    raise(errc::shape_error, "parameters must have dimension >= 1");
  }
  return WishartParams{p, std::move(omega), std::move(sigma)};
}

ProcessParams ProcessParams::make(double p, Matrix beta, Matrix q) {
  if (!(p >= 0.0) || !std::isfinite(p)) {
    raise(errc::invalid_params, "shape p must be finite and >= 0, got " +
                                    std::to_string(p));
  }
  if (beta.rows() != beta.cols() || q.rows() != q.cols() ||
      beta.rows() != q.rows() || beta.rows() == 0) {
    raise(errc::shape_error, "beta and q must be square with equal dimension");
  }
  if (!beta.allFinite() || !q.allFinite()) {
    raise(errc::non_finite, "beta/q have NaN/Inf entries");
  }
  PsdMatrix alpha = PsdMatrix::trusted(q.transpose() * q);
  return ProcessParams{p, std::move(beta), std::move(q), std::move(alpha)};
}

const char* validity_name(Validity v) {
  switch (v) {
    case Validity::valid: return "Valid";
    case Validity::invalid: return "Invalid";
    case Validity::unknown: return "Unknown";
  }
  return "Unknown";
}

bool gindikin_contains(int d, double p, double tol) {
  if (d < 1) raise(errc::shape_error, "dimension must be >= 1");
  if (p < -tol) return false;
  const double edge = (d - 1) / 2.0;
  if (p >= edge - tol) return true;  // continuous part, closed at the edge
  const double twice = 2.0 * p;
  const double nearest = std::round(twice);
  return nearest >= 0.0 && std::abs(twice - nearest) <= tol;
}

Verdict classify_wishart(const WishartParams& params) {
  const int d = static_cast<int>(params.dim());
  const double p = params.p;
  const double edge = (d - 1) / 2.0;
  const int rank_omega = rank_tol(params.omega.sym());
  const int rank_sigma = rank_tol(params.sigma.sym());
  const double tol = 1e-12;

  // R1: the continuous range covers every noncentrality.
  if (p >= edge - tol) {
    return {Validity::valid, "R1",
            "p >= (d-1)/2: continuous Gindikin range, the law exists for "
            "every psd omega"};
  }
  // R2: integer 2p with compatible rank, realized by 2p Gaussian outer
  // products.
  const double twice = 2.0 * p;
  const double nearest = std::round(twice);
  if (std::abs(twice - nearest) <= tol && nearest >= 0.0 &&
      rank_omega <= static_cast<int>(nearest)) {
    return {Validity::valid, "R2",
            "2p is a nonnegative integer and rank(omega) <= 2p: sum of 2p "
            "Gaussian outer products"};
  }
  // R3: outside the Gindikin set no law exists at all.
  if (!gindikin_contains(d, p)) {
    return {Validity::invalid, "R3",
            "p lies outside the Gindikin set Lambda_d"};
  }
  // R4: with invertible sigma the noncentrality rank is capped at 2p+1.
  if (rank_sigma == d && rank_omega > 2.0 * p + 1.0 + tol) {
    return {Validity::invalid, "R4",
            "sigma invertible and rank(omega) > 2p+1: violates the rank "
            "bound for existence"};
  }
  // R5: exclusion for fully invertible parameters below the edge. Kept for
  // completeness; R4 already covers every instance of it when evaluated in
  // this order.
  if (rank_sigma == d && rank_omega == d && p < edge - tol) {
    return {Validity::invalid, "R5",
            "sigma and omega invertible with p < (d-1)/2: no law exists with "
            "fully invertible parameters below the edge"};
  }
  return {Validity::unknown, "none",
          "no implemented criterion applies; existence is undecided here"};
}

int kalman_rank(const ProcessParams& process) {
  const Eigen::Index d = process.dim();
  Matrix blocks(d, d * d);
  Matrix term = process.q.transpose();
  for (Eigen::Index k = 0; k < d; ++k) {
    blocks.middleCols(k * d, d) = term;
    if (k + 1 < d) term = process.beta * term;
  }
  return rank_tol_svd(blocks);
}

bool transition_density_exists(const ProcessParams& process) {
  const int d = static_cast<int>(process.dim());
  return process.p > (d - 1) / 2.0 && kalman_rank(process) == d;
}

KalmanProbe kalman_equiv_probe(const ProcessParams& process, double t) {
  if (!(t > 0.0)) {
    raise(errc::invalid_params, "probe time must be > 0");
  }
  const int d = static_cast<int>(process.dim());
  KalmanProbe probe;
  probe.rank = kalman_rank(process);
  probe.rank_maximal = (probe.rank == d);
  PsdMatrix st = sigma_flow(process.beta, process.alpha, t);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.compute(st.mat(), Eigen::EigenvaluesOnly);
  probe.sigma_flow_min_eig = es.eigenvalues().minCoeff();
  probe.sigma_flow_pd = rank_tol(st.sym()) == d;
  return probe;
}

}  // namespace wishartlab
