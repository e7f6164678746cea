#pragma once

#include <vector>

#include "wishartlab/validity.hpp"

namespace wishartlab {

// Integer partition kappa_1 >= kappa_2 >= ... >= 0, indexing the zonal
// polynomial basis.
struct Partition {
  std::vector<int> parts;

  static Partition of(std::vector<int> parts);

  int weight() const;
  int length() const;  // number of nonzero parts
};

// Multivariate gamma Gamma_d(p) = pi^{d(d-1)/4} prod_j Gamma(p - (j-1)/2);
// PoleError when any gamma argument hits a pole (<= 0).
double mv_gamma(int d, double p);
double log_mv_gamma(int d, double p);

// Generalized Pochhammer (p)_kappa = prod_j (p - (j-1)/2)_{kappa_j}.
double pochhammer_partition(double p, const Partition& kappa);

// Zonal polynomial C_kappa(xi), normalized so that
// sum_{|kappa|=k} C_kappa(xi) = (tr xi)^k. Evaluated from the eigenvalues of
// xi through the Jack polynomial recurrence at parameter 2; coefficient
// tables are built once per (dimension, weight) and cached. |kappa| beyond
// max_weight raises WeightOverflow.
double zonal(const Partition& kappa, const PsdMatrix& xi, int max_weight = 30);

struct DensityResult {
  double value = 0.0;
  int terms_used = 0;         // weight blocks actually summed
  double tail_estimate = 0.0; // bound on the truncated remainder; +inf if
                              // the geometric ratio estimate is unreliable
};

// Density of the law (p, omega, sigma) at xi with respect to Lebesgue
// measure on the d(d+1)/2 distinct entries:
//
//   det(sigma)^-p exp(-tr(sigma^-1 xi) - tr(sigma a)) det(xi)^{p-(d+1)/2}
//     * sum_kappa C_kappa(sqrt(a) xi sqrt(a)) / (|kappa|! (p)_kappa)
//     / Gamma_d(p),              a = sigma^-1 omega sigma^-1.
//
// Requires p > (d-1)/2 and invertible sigma (HypothesisViolation otherwise).
// The series is summed by weight blocks, stopping at max_terms or once the
// tail estimate drops below tol.
DensityResult density(const WishartParams& params, const PsdMatrix& xi,
                      int max_terms = 30, double tol = 1e-10);

// Transition density of the process at time t > 0 from state x: the density
// of the law (p, omega_t(x), sigma_t(alpha)). NoDensity unless
// transition_density_exists(process).
DensityResult transition_density(const ProcessParams& process, double t,
                                 const PsdMatrix& x, const PsdMatrix& xi,
                                 int max_terms = 30, double tol = 1e-10);

}  // namespace wishartlab
