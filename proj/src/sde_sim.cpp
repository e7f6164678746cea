#include "wishartlab/sde_sim.hpp"

#include <cmath>
#include <map>
#include <random>

#include "wishartlab/affine_flow.hpp"
#include "wishartlab/rng.hpp"
#include "wishartlab/threading.hpp"

namespace wishartlab {

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.empty() || grid[0] != 0.0) {
    raise(errc::grid_error, "grid must start at t = 0");
  }
  for (std::size_t m = 1; m < grid.size(); ++m) {
    if (!(grid[m] > grid[m - 1]) || !std::isfinite(grid[m])) {
      raise(errc::grid_error, "grid times must be finite, strictly increasing");
    }
  }
}

std::vector<std::size_t> stored_indices(std::size_t steps,
                                        std::size_t stride) {
  if (stride == 0) stride = 1;
  std::vector<std::size_t> kept;
  for (std::size_t m = 0; m + 1 < steps; m += stride) kept.push_back(m);
  kept.push_back(steps - 1);  // endpoint always kept
  return kept;
}

// Eigendecomposition of one symmetric state: closed-form for the fixed 2x2
// and 3x3 kernels, iterative otherwise.
template <typename Mat>
void sym_eig(Eigen::SelfAdjointEigenSolver<Mat>& es, const Mat& a) {
  if constexpr (Mat::RowsAtCompileTime == 2 || Mat::RowsAtCompileTime == 3) {
    es.computeDirect(a);
  } else {
    es.compute(a);
  }
}

// Per-step view handed to the replay callback in girsanov_weights.
template <typename Mat>
struct EulerStepView {
  const Mat& state;              // projected state X_m
  const Mat& sqrt_state;         // sqrt of X_m
  const Mat& increment;          // dB over [t_m, t_{m+1})
  const Eigen::SelfAdjointEigenSolver<Mat>& eig;  // of the raw state
  double dt;
};

struct NoOpStep {
  template <typename View>
  void operator()(std::size_t, const View&) const {}
};

// One Euler path. Grid index m runs over states; the increment for step m
// is drawn from the (seed, path, m) substream in row-major entry order so
// that any consumer can replay it. on_step fires before the state advances.
template <typename Mat, typename OnStep>
void euler_path(const ProcessParams& process, const Mat& x0,
                const std::vector<double>& grid, std::uint64_t seed,
                std::size_t path, std::vector<double>& min_eig_out,
                const std::vector<std::size_t>& kept,
                std::vector<PsdMatrix>* states_out, OnStep&& on_step) {
  const Eigen::Index d = x0.rows();
  const Matrix& beta_dyn = process.beta;
  const Matrix& q_dyn = process.q;
  const Matrix& alpha_dyn = process.alpha.mat();
  const Mat beta = beta_dyn, q = q_dyn;
  const Mat two_p_alpha = (2.0 * process.p * alpha_dyn).eval();

  Eigen::SelfAdjointEigenSolver<Mat> es;
  sym_eig(es, x0);
  Mat state = es.eigenvectors() *
              es.eigenvalues().cwiseMax(0.0).asDiagonal() *
              es.eigenvectors().transpose();
  Mat root = es.eigenvectors() *
             es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
             es.eigenvectors().transpose();
  min_eig_out[0] = es.eigenvalues().minCoeff();

  std::size_t kept_pos = 0;
  auto maybe_store = [&](std::size_t m, const Mat& value) {
    if (states_out && kept_pos < kept.size() && kept[kept_pos] == m) {
      (*states_out)[kept_pos] = PsdMatrix::trusted(Matrix(value));
      ++kept_pos;
    }
  };
  maybe_store(0, state);

  Mat db(d, d), mixed(d, d), drift(d, d), raw(d, d);
  for (std::size_t m = 0; m + 1 < grid.size(); ++m) {
    const double dt = grid[m + 1] - grid[m];
    SplitMix64 gen = substream(seed, rng_domain::euler, path, m);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(dt);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) db(i, j) = scale * normal(gen);

    on_step(m, EulerStepView<Mat>{state, root, db, es, dt});

    mixed.noalias() = root * db * q;
    drift.noalias() = beta * state;
    raw = state + mixed + mixed.transpose() +
          dt * (two_p_alpha + drift + drift.transpose());

    sym_eig(es, raw);
    min_eig_out[m + 1] = es.eigenvalues().minCoeff();
    state.noalias() = es.eigenvectors() *
                      es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                      es.eigenvectors().transpose();
    state = ((state + state.transpose()) / 2.0).eval();
    root.noalias() = es.eigenvectors() *
                     es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                     es.eigenvectors().transpose();
    maybe_store(m + 1, state);
  }
}

template <typename Mat>
void run_euler(const ProcessParams& process, const Matrix& x0,
               const std::vector<double>& grid, std::size_t n,
               std::uint64_t seed, const SimOptions& opts,
               PathEnsemble& out) {
  const Mat x = x0;
  parallel_for(n, opts.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t path = lo; path < hi; ++path) {
      out.states[path].resize(out.stored_steps.size());
      out.min_eig[path].resize(grid.size());
      euler_path<Mat>(process, x, grid, seed, path, out.min_eig[path],
                      out.stored_steps, &out.states[path], NoOpStep{});
    }
  });
}

McEstimate mean_se(const std::vector<double>& values) {
  const std::size_t n = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::euler: return "Euler";
    case Scheme::ou_squares: return "OuSquares";
  }
  return "Euler";
}

std::vector<PsdMatrix> PathEnsemble::endpoints() const {
  std::vector<PsdMatrix> out;
  out.reserve(states.size());
  for (const auto& path : states) out.push_back(path.back());
  return out;
}

PathEnsemble simulate_euler(const ProcessParams& process, const PsdMatrix& x,
                            const std::vector<double>& grid, std::size_t n,
                            std::uint64_t seed, const SimOptions& opts) {
  check_grid(grid);
  if (x.dim() != process.dim()) {
    raise(errc::shape_error, "simulate_euler: x dimension mismatch");
  }
  if (n == 0) raise(errc::empty_batch, "simulate_euler: n must be >= 1");

  PathEnsemble out;
  out.process = process;
  out.scheme = Scheme::euler;
  out.seed = seed;
  out.grid = grid;
  out.stored_steps = stored_indices(grid.size(), opts.store_stride);
  out.states.resize(n);
  out.min_eig.resize(n);
  out.x0 = x;

  switch (process.dim()) {
    case 2:
      run_euler<Eigen::Matrix2d>(process, x.mat(), grid, n, seed, opts, out);
      break;
    case 3:
      run_euler<Eigen::Matrix3d>(process, x.mat(), grid, n, seed, opts, out);
      break;
    default:
      run_euler<Matrix>(process, x.mat(), grid, n, seed, opts, out);
      break;
  }
  return out;
}

PathEnsemble simulate_ou_squares(const ProcessParams& process,
                                 const std::vector<Vector>& y,
                                 const std::vector<double>& grid,
                                 std::size_t n, std::uint64_t seed,
                                 const SimOptions& opts) {
  check_grid(grid);
  const Eigen::Index d = process.dim();
  const double twice = 2.0 * process.p;
  if (std::abs(twice - std::round(twice)) > 1e-12 || twice < 0.0) {
    raise(errc::invalid_params,
          "simulate_ou_squares requires an integer 2p, got 2p = " +
              std::to_string(twice));
  }
  const std::size_t k = static_cast<std::size_t>(std::llround(twice));
  if (y.size() != k) {
    raise(errc::invalid_params,
          "simulate_ou_squares: expected 2p = " + std::to_string(k) +
              " factor vectors, got " + std::to_string(y.size()));
  }
  for (const Vector& v : y) {
    if (v.size() != d) {
      raise(errc::shape_error, "simulate_ou_squares: factor dimension mismatch");
    }
  }
  if (n == 0) raise(errc::empty_batch, "simulate_ou_squares: n must be >= 1");

  // Per-step propagator and factor noise root, shared across paths; grids
  // with repeated spacing reuse the same entry.
  const std::size_t steps = grid.size();
  std::vector<Matrix> prop(steps > 0 ? steps - 1 : 0);
  std::vector<Matrix> noise_root(prop.size());
  std::map<double, std::pair<Matrix, Matrix>> by_dt;
  for (std::size_t m = 0; m + 1 < steps; ++m) {
    const double dt = grid[m + 1] - grid[m];
    auto it = by_dt.find(dt);
    if (it == by_dt.end()) {
      Matrix e = matrix_exp(process.beta * dt);
      PsdMatrix cov = PsdMatrix::trusted(
          sigma_flow(process.beta, process.alpha, dt).mat() / 2.0);
      it = by_dt.emplace(dt, std::make_pair(e, sqrt_psd(cov).mat())).first;
    }
    prop[m] = it->second.first;
    noise_root[m] = it->second.second;
  }

  Matrix x0 = Matrix::Zero(d, d);
  for (const Vector& v : y) x0.selfadjointView<Eigen::Lower>().rankUpdate(v);
  x0 = x0.selfadjointView<Eigen::Lower>();

  PathEnsemble out;
  out.process = process;
  out.scheme = Scheme::ou_squares;
  out.seed = seed;
  out.grid = grid;
  out.stored_steps = stored_indices(steps, opts.store_stride);
  out.states.resize(n);
  out.min_eig.resize(n);
  out.x0 = PsdMatrix::trusted(x0);

  parallel_for(n, opts.threads, [&](std::size_t lo, std::size_t hi) {
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    std::vector<Vector> factors(k, Vector(d));
    Vector z(d);
    Matrix x(d, d);
    for (std::size_t path = lo; path < hi; ++path) {
      out.states[path].resize(out.stored_steps.size());
      out.min_eig[path].resize(steps);
      for (std::size_t f = 0; f < k; ++f) factors[f] = y[f];

      std::size_t kept_pos = 0;
      auto record = [&](std::size_t m) {
        x.setZero();
        for (const Vector& v : factors)
          x.selfadjointView<Eigen::Lower>().rankUpdate(v);
        x = x.selfadjointView<Eigen::Lower>();
        es.compute(x, Eigen::EigenvaluesOnly);
        out.min_eig[path][m] = es.eigenvalues().minCoeff();
        if (kept_pos < out.stored_steps.size() &&
            out.stored_steps[kept_pos] == m) {
          out.states[path][kept_pos] = PsdMatrix::trusted(x);
          ++kept_pos;
        }
      };

      record(0);
      for (std::size_t m = 0; m + 1 < steps; ++m) {
        SplitMix64 gen = substream(seed, rng_domain::ou_squares, path, m);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t f = 0; f < k; ++f) {
          for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(gen);
          factors[f] = prop[m] * factors[f] + noise_root[m] * z;
        }
        record(m + 1);
      }
    }
  });
  return out;
}

HittingStats hitting_stats(const PathEnsemble& ensemble, double eps) {
  if (!(eps > 0.0)) {
    raise(errc::invalid_params, "hitting_stats: eps must be > 0");
  }
  if (ensemble.paths() == 0) raise(errc::empty_batch, "empty ensemble");
  HittingStats stats;
  stats.eps = eps;
  stats.first_hit.resize(ensemble.paths());
  std::size_t hits = 0;
  for (std::size_t path = 0; path < ensemble.paths(); ++path) {
    for (std::size_t m = 0; m < ensemble.grid.size(); ++m) {
      if (ensemble.min_eig[path][m] < eps) {
        stats.first_hit[path] = ensemble.grid[m];
        ++hits;
        break;
      }
    }
  }
  const double n = static_cast<double>(ensemble.paths());
  stats.hit_fraction = static_cast<double>(hits) / n;
  stats.se = std::sqrt(stats.hit_fraction * (1.0 - stats.hit_fraction) / n);
  return stats;
}

LogDetSeries logdet_diagnostics(const PathEnsemble& ensemble,
                                std::size_t path_index) {
  if (path_index >= ensemble.paths()) {
    raise(errc::invalid_params, "logdet_diagnostics: path index out of range");
  }
  if (ensemble.stored_steps.size() != ensemble.grid.size()) {
    raise(errc::precondition_violation,
          "logdet_diagnostics needs a stride-1 ensemble (all states stored)");
  }
  const ProcessParams& process = ensemble.process;
  const int d = static_cast<int>(process.dim());
  const auto& path = ensemble.states[path_index];

  LogDetSeries series;
  double compensator = 0.0;
  for (std::size_t m = 0; m < ensemble.grid.size(); ++m) {
    const double t = ensemble.grid[m];
    const Matrix& state = path[m].mat();
    const Matrix e = matrix_exp(-process.beta * t);
    Matrix transformed = e.transpose() * state * e;
    transformed = (transformed + transformed.transpose()) / 2.0;

    Eigen::LLT<Matrix> state_llt(state);
    Eigen::LLT<Matrix> trans_llt(transformed);
    const bool pd = state_llt.info() == Eigen::Success &&
                    trans_llt.info() == Eigen::Success;
    if (!pd) {
      if (m == 0) {
        raise(errc::singular_state,
              "logdet_diagnostics: initial state is on the boundary");
      }
      break;  // series stops at the first boundary contact
    }

    const double h =
        2.0 * trans_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    series.t.push_back(t);
    series.h.push_back(h);
    series.compensator.push_back(compensator);
    series.martingale.push_back(h - series.h.front() - compensator);

    if (m + 1 < ensemble.grid.size()) {
      const double dt = ensemble.grid[m + 1] - t;
      const Matrix inv = state_llt.solve(Matrix::Identity(d, d));
      compensator +=
          (2.0 * process.p - (d + 1)) * (process.alpha.mat() * inv).trace() * dt;
    }
  }
  return series;
}

GirsanovReport girsanov_weights(const PathEnsemble& source_paths,
                                const ProcessParams& target,
                                const std::vector<PsdMatrix>& u_grid) {
  const ProcessParams& source = source_paths.process;
  const Eigen::Index d = source.dim();
  if (source_paths.scheme != Scheme::euler) {
    raise(errc::precondition_violation,
          "girsanov_weights replays increments and needs an Euler ensemble");
  }
  if (target.dim() != d) {
    raise(errc::shape_error, "girsanov_weights: target dimension mismatch");
  }
  const double q_gap = (source.q - target.q).cwiseAbs().maxCoeff();
  if (q_gap > 1e-12 * std::max(1.0, source.q.cwiseAbs().maxCoeff())) {
    raise(errc::precondition_violation,
          "girsanov_weights requires source and target to share Q");
  }
  if (rank_tol_svd(source.q) != static_cast<int>(d)) {
    raise(errc::not_invertible, "girsanov_weights: Q is singular");
  }
  if (std::min(source.p, target.p) < (d + 1) / 2.0 - 1e-12) {
    raise(errc::hypothesis_violation,
          "girsanov_weights: min(p, p_target) >= (d+1)/2 is required for the "
          "weights to integrate to one");
  }
  for (const PsdMatrix& u : u_grid) {
    if (u.dim() != d) {
      raise(errc::shape_error, "girsanov_weights: u dimension mismatch");
    }
  }

  const Matrix q_inv =
      Eigen::PartialPivLU<Matrix>(source.q).inverse();
  const Matrix beta_gap_t = (source.beta - target.beta).transpose();
  const double p_gap = source.p - target.p;

  const std::size_t n = source_paths.paths();
  GirsanovReport report;
  report.weights.resize(n);
  std::vector<std::vector<double>> weighted(u_grid.size(),
                                            std::vector<double>(n));

  // Replay each path with the same keyed increments the simulation used;
  // gamma is evaluated at the pre-step state.
  for (std::size_t path = 0; path < n; ++path) {
    double log_z = 0.0;
    Matrix endpoint;
    std::vector<double> scratch_min_eig(source_paths.grid.size());
    auto on_step = [&](std::size_t, const EulerStepView<Matrix>& view) {
      const Vector clipped = view.eig.eigenvalues().cwiseMax(0.0);
      if (clipped.minCoeff() <= 0.0) {
        raise(errc::precondition_violation,
              "girsanov_weights: state reached the boundary; weights are "
              "defined for strictly positive definite paths");
      }
      const Matrix root_inv =
          view.eig.eigenvectors() *
          clipped.cwiseSqrt().cwiseInverse().asDiagonal() *
          view.eig.eigenvectors().transpose();
      const Matrix gamma = view.sqrt_state * beta_gap_t * q_inv +
                           p_gap * root_inv * source.q.transpose();
      log_z -= (gamma * view.increment).trace() +
               0.5 * gamma.squaredNorm() * view.dt;
    };
    // The initial eigendecomposition in euler_path uses the raw x0, matching
    // the simulation exactly; no states are stored during the replay.
    std::vector<PsdMatrix> endpoint_only(1);
    const std::vector<std::size_t> kept = {source_paths.grid.size() - 1};
    euler_path<Matrix>(source, source_paths.x0.mat(), source_paths.grid,
                       source_paths.seed, path, scratch_min_eig, kept,
                       &endpoint_only, on_step);
    endpoint = endpoint_only[0].mat();

    const double z = std::exp(log_z);
    report.weights[path] = z;
    for (std::size_t ui = 0; ui < u_grid.size(); ++ui) {
      weighted[ui][path] =
          z * std::exp(-(u_grid[ui].mat() * endpoint).trace());
    }
  }

  const McEstimate w = mean_se(report.weights);
  report.mean_weight = w.mean;
  report.se_weight = w.se;
  for (std::size_t ui = 0; ui < u_grid.size(); ++ui) {
    const McEstimate est = mean_se(weighted[ui]);
    report.reweighted_laplace.push_back(est.mean);
    report.reweighted_se.push_back(est.se);
  }
  return report;
}

McEstimate mc_laplace(const std::vector<PsdMatrix>& samples,
                      const SymMatrix& u) {
  if (samples.empty()) {
    raise(errc::empty_batch, "mc_laplace: no samples");
  }
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].dim() != u.dim()) {
      raise(errc::shape_error, "mc_laplace: dimension mismatch");
    }
    values[i] = std::exp(-(u.mat() * samples[i].mat()).trace());
  }
  return mean_se(values);
}

}  // namespace wishartlab
