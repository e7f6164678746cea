#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wishartlab/validity.hpp"

namespace wishartlab {

enum class Scheme { euler, ou_squares };

const char* scheme_name(Scheme s);

struct SimOptions {
  // Every store_stride-th grid state is kept (t=0 and the endpoint always
  // are); min-eig diagnostics are always recorded at every step.
  std::size_t store_stride = 1;
  int threads = 1;
};

struct PathEnsemble {
  ProcessParams process;
  Scheme scheme = Scheme::euler;
  std::uint64_t seed = 0;
  std::vector<double> grid;                    // t_0 = 0 < t_1 < ... < t_M
  std::vector<std::size_t> stored_steps;       // grid indices of kept states
  std::vector<std::vector<PsdMatrix>> states;  // [path][stored step]
  std::vector<std::vector<double>> min_eig;    // [path][step], pre-projection
  PsdMatrix x0;

  std::size_t paths() const { return states.size(); }
  const PsdMatrix& endpoint(std::size_t path) const {
    return states[path].back();
  }
  std::vector<PsdMatrix> endpoints() const;
};

// Euler scheme for dX = sqrt(X) dB Q + Q^T dB^T sqrt(X)
//                        + (2p Q^T Q + beta X + X beta^T) dt.
// The state is projected onto the PSD cone before each square root; the
// minimum eigenvalue of each raw (pre-projection) state is recorded.
PathEnsemble simulate_euler(const ProcessParams& process, const PsdMatrix& x,
                            const std::vector<double>& grid, std::size_t n,
                            std::uint64_t seed, const SimOptions& opts = {});

// Squares-of-OU construction for integer 2p: factors follow
// Y_{t+h} = e^{beta h} Y_t + eta, eta ~ N(0, sigma_h(alpha)/2), and
// X_t = sum_i Y_i Y_i^T. Exact in law at the grid points.
PathEnsemble simulate_ou_squares(const ProcessParams& process,
                                 const std::vector<Vector>& y,
                                 const std::vector<double>& grid,
                                 std::size_t n, std::uint64_t seed,
                                 const SimOptions& opts = {});

struct HittingStats {
  std::vector<std::optional<double>> first_hit;  // per path, grid time
  double hit_fraction = 0.0;
  double se = 0.0;  // binomial standard error
  double eps = 0.0;
};

// First grid time per path where the pre-projection minimum eigenvalue drops
// below eps, plus the hit fraction across the ensemble.
HittingStats hitting_stats(const PathEnsemble& ensemble, double eps);

struct LogDetSeries {
  std::vector<double> t;
  std::vector<double> h;            // log det(e^{-beta^T t} X_t e^{-beta t})
  std::vector<double> compensator;  // int (2p-(d+1)) tr(Q^T Q X_s^-1) ds
  std::vector<double> martingale;   // h - h_0 - compensator
};

// Decomposition of the transformed log-determinant along one stored path.
// Requires a stride-1 Euler or OU ensemble; the series stops before the
// first state that is not positive definite (SingularState if that is the
// initial one).
LogDetSeries logdet_diagnostics(const PathEnsemble& ensemble,
                                std::size_t path_index);

struct GirsanovReport {
  std::vector<double> weights;  // Z_T per path
  double mean_weight = 0.0;
  double se_weight = 0.0;
  std::vector<double> reweighted_laplace;  // E[Z_T exp(-tr(u X_T))] per u
  std::vector<double> reweighted_se;
};

// Change-of-measure weights from the ensemble's (source) process to a target
// with the same Q:
//   gamma_s = sqrt(X_s)(beta^T - beta_target^T) Q^-1
//             + (p - p_target) sqrt(X_s)^-1 Q^T,
//   Z advanced by exp(-tr(gamma dB) - 1/2 |gamma|_F^2 dt)
// on the replayed increments of the source simulation. Requires an Euler
// ensemble, invertible shared Q, min(p, p_target) >= (d+1)/2, and strictly
// positive definite states along the paths.
GirsanovReport girsanov_weights(const PathEnsemble& source_paths,
                                const ProcessParams& target,
                                const std::vector<PsdMatrix>& u_grid);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// Monte Carlo transform estimate mean/SE of exp(-tr(u X)) over a batch.
McEstimate mc_laplace(const std::vector<PsdMatrix>& samples,
                      const SymMatrix& u);

}  // namespace wishartlab
