#include "wishartlab/wishart_dist.hpp"

#include <cmath>
#include <random>

#include "wishartlab/rng.hpp"
#include "wishartlab/threading.hpp"

namespace wishartlab {

namespace {

// Factors omega into columns mu_i with sum_i mu_i mu_i^T = omega, dropping
// directions below the rank tolerance. Mass lost to the cut is folded into
// the largest retained direction when it exceeds 1e-14, otherwise dropped.
Matrix noncentral_factors(const PsdMatrix& omega) {
  const Eigen::Index d = omega.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(omega.mat());
  const Vector evals = es.eigenvalues();
  const double top = evals.cwiseAbs().maxCoeff();
  const double cut = kRankRelTol * top;

  std::vector<Eigen::Index> keep;
  double discarded = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (evals(i) > cut) {
      keep.push_back(i);
    } else if (evals(i) > 0.0) {
      discarded += evals(i);
    }
  }
  Matrix mu(d, static_cast<Eigen::Index>(keep.size()));
  // Eigen sorts ascending; the last kept index has the largest eigenvalue.
  for (std::size_t c = 0; c < keep.size(); ++c) {
    double lam = evals(keep[c]);
    if (c + 1 == keep.size() && discarded > 1e-14) lam += discarded;
    mu.col(static_cast<Eigen::Index>(c)) =
        es.eigenvectors().col(keep[c]) * std::sqrt(lam);
  }
  return mu;
}

struct SamplerPlan {
  SampleMethod method = SampleMethod::gaussian_sum;
  int k = 0;             // Gaussian terms (2p for pure GaussianSum)
  double central_q = 0;  // Bartlett central shape p - rank(omega)/2
  Matrix mu;             // noncentral mean columns, d x rank(omega)
  Matrix noise_half;     // sqrt(sigma/2), shared by both constructions
};

SamplerPlan plan_sampler(const WishartParams& params,
                         std::optional<SampleMethod> force) {
  const Verdict verdict = classify_wishart(params);
  if (verdict.status != Validity::valid) {
    raise(errc::invalid_params,
          "cannot sample: classification is " +
              std::string(validity_name(verdict.status)) + " (" +
              verdict.rule_id + ": " + verdict.reason + ")");
  }

  const int d = static_cast<int>(params.dim());
  SamplerPlan plan;
  plan.mu = noncentral_factors(params.omega);
  plan.noise_half = sqrt_psd(PsdMatrix::trusted(params.sigma.mat() / 2.0)).mat();
  const int r = static_cast<int>(plan.mu.cols());

  const double twice = 2.0 * params.p;
  const bool integer_2p = std::abs(twice - std::round(twice)) <= 1e-12;
  const bool gaussian_ok = integer_2p && r <= static_cast<int>(std::round(twice));
  const bool bartlett_ok = params.p - r / 2.0 > (d - 1) / 2.0;

  SampleMethod method;
  if (force.has_value()) {
    method = *force;
    if ((method == SampleMethod::gaussian_sum && !gaussian_ok) ||
        (method == SampleMethod::bartlett_composite && !bartlett_ok)) {
      raise(errc::unsupported_shape,
            std::string("forced method ") + sample_method_name(method) +
                " does not apply to these parameters");
    }
  } else if (gaussian_ok) {
    method = SampleMethod::gaussian_sum;
  } else if (bartlett_ok) {
    method = SampleMethod::bartlett_composite;
  } else {
    raise(errc::unsupported_shape,
          "parameters are valid but fit neither the Gaussian-sum nor the "
          "Bartlett-composite construction");
  }

  plan.method = method;
  if (method == SampleMethod::gaussian_sum) {
    plan.k = static_cast<int>(std::round(twice));
    plan.central_q = 0.0;
  } else {
    plan.k = r;
    plan.central_q = params.p - r / 2.0;
  }
  return plan;
}

// One draw from its keyed substream. The Gaussian part sums k outer products
// of N(mu_i, sigma/2) vectors; the Bartlett part is S A A^T S with
// S = sqrt(sigma/2) and A lower triangular, A_ii^2 ~ chi^2_{2q-i+1} (1-based),
// subdiagonal standard normal.
Matrix one_draw(const SamplerPlan& plan, Eigen::Index d, std::uint64_t seed,
                std::uint64_t index) {
  SplitMix64 gen = substream(seed, rng_domain::sample, index);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix acc = Matrix::Zero(d, d);
  Vector z(d), xi(d);
  for (int i = 0; i < plan.k; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(gen);
    xi = plan.noise_half * z;
    if (i < plan.mu.cols()) xi += plan.mu.col(i);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(xi);
  }

  if (plan.central_q > 0.0) {
    Matrix a = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double dof = 2.0 * plan.central_q - static_cast<double>(i);
      std::gamma_distribution<double> chi2(dof / 2.0, 2.0);
      a(i, i) = std::sqrt(chi2(gen));
      for (Eigen::Index j = 0; j < i; ++j) a(i, j) = normal(gen);
    }
    const Matrix sa = plan.noise_half * a;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(sa);
  }

  return acc.selfadjointView<Eigen::Lower>();
}

}  // namespace

const char* sample_method_name(SampleMethod m) {
  switch (m) {
    case SampleMethod::gaussian_sum: return "GaussianSum";
    case SampleMethod::bartlett_composite: return "BartlettComposite";
  }
  return "GaussianSum";
}

double laplace(const WishartParams& params, const SymMatrix& u) {
  const Eigen::Index d = params.dim();
  if (u.dim() != d) raise(errc::shape_error, "laplace: u dimension mismatch");

  const Matrix s_half = sqrt_psd(params.sigma).mat();
  Matrix m = Matrix::Identity(d, d) + s_half * u.mat() * s_half;
  m = (m + m.transpose()) / 2.0;
  const double logdet =
      logdet_pd(m, errc::singular_resolvent,
                "I + sqrt(sigma) u sqrt(sigma) (u outside transform domain)");

  // tr(u (I + sigma u)^{-1} omega) via the same congruence:
  // u (I + sigma u)^{-1} = S^{-T}... avoided; use the identity
  // u (I + sigma u)^{-1} = u - u S (I + S u S)^{-1} S u, valid for all
  // symmetric u in the domain and free of sqrt(u).
  Eigen::LLT<Matrix> llt(m);
  const Matrix su = s_half * u.mat();
  const Matrix core = u.mat() - su.transpose() * llt.solve(su);
  const double tr = (core * params.omega.mat()).trace();
  return std::exp(-params.p * logdet - tr);
}

SymMatrix mean(const WishartParams& params) {
  return SymMatrix::symmetrized(params.p * params.sigma.mat() +
                                params.omega.mat());
}

SampleBatch sample(const WishartParams& params, std::size_t n,
                   std::uint64_t seed, std::optional<SampleMethod> force,
                   int threads) {
  const SamplerPlan plan = plan_sampler(params, force);
  const Eigen::Index d = params.dim();

  SampleBatch batch;
  batch.seed = seed;
  batch.method = plan.method;
  batch.draws.resize(n);
  parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      batch.draws[i] = PsdMatrix::trusted(one_draw(plan, d, seed, i));
    }
  });
  return batch;
}

WishartParams pushforward_scale(const WishartParams& params,
                                const PsdMatrix& q) {
  const Eigen::Index d = params.dim();
  if (q.dim() != d) {
    raise(errc::shape_error, "pushforward_scale: q dimension mismatch");
  }
  const Matrix identity_gap =
      params.sigma.mat() - Matrix::Identity(d, d);
  if (identity_gap.cwiseAbs().maxCoeff() > 1e-12) {
    raise(errc::precondition_violation,
          "pushforward_scale requires sigma == I");
  }
  PsdMatrix omega = PsdMatrix::trusted(q.mat() * params.omega.mat() * q.mat());
  PsdMatrix sigma = PsdMatrix::trusted(q.mat() * q.mat());
  return WishartParams::make(params.p, std::move(omega), std::move(sigma));
}

WishartParams tilt_to_scale(const WishartParams& params,
                            const PsdMatrix& sigma_new) {
  const Eigen::Index d = params.dim();
  if (sigma_new.dim() != d) {
    raise(errc::shape_error, "tilt_to_scale: sigma_new dimension mismatch");
  }
  const Matrix identity_gap =
      params.sigma.mat() - Matrix::Identity(d, d);
  if (identity_gap.cwiseAbs().maxCoeff() > 1e-12) {
    raise(errc::precondition_violation, "tilt_to_scale requires sigma == I");
  }
  if (rank_tol(sigma_new.sym()) != static_cast<int>(d)) {
    raise(errc::not_invertible, "tilt_to_scale: sigma_new is singular");
  }
  PsdMatrix omega =
      PsdMatrix::trusted(sigma_new.mat() * params.omega.mat() * sigma_new.mat());
  return WishartParams::make(params.p, std::move(omega), sigma_new);
}

WishartParams convolve(const WishartParams& a, const WishartParams& b,
                       double tol) {
  if (a.dim() != b.dim()) {
    raise(errc::shape_error, "convolve: dimension mismatch");
  }
  const double gap = (a.sigma.mat() - b.sigma.mat()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, a.sigma.mat().cwiseAbs().maxCoeff());
  if (gap > tol * scale) {
    raise(errc::scale_mismatch,
          "convolve requires equal scales; max deviation " +
              std::to_string(gap));
  }
  PsdMatrix omega = PsdMatrix::trusted(a.omega.mat() + b.omega.mat());
  return WishartParams::make(a.p + b.p, std::move(omega), a.sigma);
}

}  // namespace wishartlab
