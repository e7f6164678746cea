#pragma once

#include <string>

#include "wishartlab/symcone.hpp"

namespace wishartlab {

// Parameters of the distribution family: shape p >= 0, noncentrality omega,
// scale sigma, all on S_d^+.
struct WishartParams {
  double p = 0.0;
  PsdMatrix omega;
  PsdMatrix sigma;

  Eigen::Index dim() const { return sigma.dim(); }

  static WishartParams make(double p, PsdMatrix omega, PsdMatrix sigma);
};

// Parameters of the process: dX = sqrt(X) dB Q + Q^T dB^T sqrt(X)
//                                 + (2p Q^T Q + beta X + X beta^T) dt.
// alpha = Q^T Q is derived at construction and kept exactly symmetric.
struct ProcessParams {
  double p = 0.0;
  Matrix beta;
  Matrix q;
  PsdMatrix alpha;

  Eigen::Index dim() const { return beta.rows(); }

  static ProcessParams make(double p, Matrix beta, Matrix q);
};

enum class Validity { valid, invalid, unknown };

const char* validity_name(Validity v);

struct Verdict {
  Validity status = Validity::unknown;
  std::string rule_id;  // "R1".."R5" or "none"
  std::string reason;
};

// Membership in the Gindikin set {0, 1/2, ..., (d-1)/2} union ((d-1)/2, inf).
bool gindikin_contains(int d, double p, double tol = 1e-12);

// Ordered decision table for existence of the law with parameters (p, omega,
// sigma). Rules R1/R2 certify existence, R3/R4/R5 exclude it, anything else
// is reported unknown rather than guessed.
Verdict classify_wishart(const WishartParams& params);

// Rank of the controllability block matrix [Q^T, beta Q^T, ..., beta^{d-1} Q^T].
int kalman_rank(const ProcessParams& process);

// Transition densities exist iff p > (d-1)/2 and the Kalman rank is maximal.
bool transition_density_exists(const ProcessParams& process);

struct KalmanProbe {
  bool rank_maximal = false;
  bool sigma_flow_pd = false;
  int rank = 0;
  double sigma_flow_min_eig = 0.0;
};

// Checks the controllability criterion against positive definiteness of the
// accumulated scale flow at time t > 0; the two must agree.
KalmanProbe kalman_equiv_probe(const ProcessParams& process, double t);

}  // namespace wishartlab
