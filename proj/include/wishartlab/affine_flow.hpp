#pragma once

#include "wishartlab/validity.hpp"

namespace wishartlab {

// Drift flow e^{beta t} x e^{beta^T t}.
PsdMatrix omega_flow(const Matrix& beta, const PsdMatrix& x, double t);

// Accumulated scale 2 * int_0^t e^{beta s} alpha e^{beta^T s} ds for t >= 0.
//
// Primary route is the block upper-triangular augmented matrix exponential
// (exp of [[beta, alpha], [0, -beta^T]] t); an adaptive Gauss-Legendre
// quadrature cross-checks it and QuadratureDivergence is raised if both
// routes disagree beyond 1e-8 relative.
PsdMatrix sigma_flow(const Matrix& beta, const PsdMatrix& alpha, double t);

// Exponent pair of the transition transform,
//   E[exp(-tr(u X_t)) | X_0 = x] = exp(-phi(t,u) - tr(psi(t,u) x)).
struct FlowPair {
  double phi = 0.0;
  PsdMatrix psi;
};

// phi = p log det(I + u sigma_t), psi = e^{beta^T t} u (I + sigma_t u)^{-1}
// e^{beta t}, both evaluated in singular-safe symmetrized form.
FlowPair flow_pair(const ProcessParams& process, double t, const PsdMatrix& u);

// The transform itself, exp(-phi - tr(psi x)).
double transition_laplace(const ProcessParams& process, double t,
                          const PsdMatrix& u, const PsdMatrix& x);

// Generator applied to f_u(x) = exp(-tr(u x)) through the coordinate form
//   (1/2) sum_ijkl A_ijkl(x) d^2 f / dx_ij dx_kl + tr(drift(x) grad f),
// A_ijkl = x_ik a_jl + x_il a_jk + x_jk a_il + x_jl a_ik with a = Q^T Q and
// drift = beta x + x beta^T + 2p Q^T Q. Returns the scalar value at x.
double generator_on_exponential(const ProcessParams& process,
                                const PsdMatrix& u, const PsdMatrix& x);

}  // namespace wishartlab
