#include "wishartlab/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include "wishartlab/affine_flow.hpp"

namespace wishartlab {

namespace {

// ---------------------------------------------------------------------------
// Partition combinatorics.
//
// Zonal polynomials are Jack polynomials at parameter 2. We expand the monic
// Jack polynomial in monomial symmetric functions,
//
//   P_kappa = m_kappa + sum_{lambda < kappa} c_{kappa lambda} m_lambda,
//
// where the coefficients follow from the eigenfunction property of the
// Laplace-Beltrami operator: with rho_lambda = sum_i lambda_i (lambda_i - i),
//
//   c_{kappa lambda} = [ sum ((lambda_i + t) - (lambda_j - t))
//                              c_{kappa mu} ] / (rho_kappa - rho_lambda),
//
// summed over single moves lambda -> mu that shift t >= 1 units from part j
// to an earlier part i (i < j) with lambda < mu <= kappa in dominance order.
// The zonal normalization (sum over a weight equals the trace power) is then
//
//   C_kappa = 2^k k! / c'_kappa * P_kappa,
//   c'_kappa = prod over cells (i,j) of [2 (kappa_i - j + 1) + kappa'_j - i].
//
// Tables are cached per (max length, weight); evaluation plugs eigenvalues
// into the monomials. All recurrence weights are positive, so there is no
// cancellation and doubles stay accurate through the weights used here.
// ---------------------------------------------------------------------------

using Parts = std::vector<int>;  // nonzero parts, nonincreasing

int parts_weight(const Parts& parts) {
  return std::accumulate(parts.begin(), parts.end(), 0);
}

// True if a <= b in dominance order (equal weights assumed).
bool dominated(const Parts& a, const Parts& b) {
  int sum_a = 0, sum_b = 0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    sum_a += i < a.size() ? a[i] : 0;
    sum_b += i < b.size() ? b[i] : 0;
    if (sum_a > sum_b) return false;
  }
  return true;
}

double rho(const Parts& parts) {
  double r = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    r += static_cast<double>(parts[i]) * (parts[i] - static_cast<double>(i + 1));
  }
  return r;
}

void enumerate_partitions(int remaining, int max_part, int slots, Parts& cur,
                          std::vector<Parts>& out) {
  if (remaining == 0) {
    out.push_back(cur);
    return;
  }
  if (slots == 0) return;
  for (int part = std::min(remaining, max_part); part >= 1; --part) {
    cur.push_back(part);
    enumerate_partitions(remaining - part, part, slots - 1, cur, out);
    cur.pop_back();
  }
}

// log of the zonal normalization constant 2^k k! / c'_kappa.
double log_norm_constant(const Parts& kappa) {
  const int k = parts_weight(kappa);
  Parts conj;
  if (!kappa.empty()) {
    conj.assign(kappa[0], 0);
    for (int part : kappa)
      for (int j = 0; j < part; ++j) conj[j] += 1;
  }
  double log_hooks = 0.0;
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    for (int j = 1; j <= kappa[i]; ++j) {
      const double arm = kappa[i] - j;
      const double leg = conj[j - 1] - static_cast<double>(i + 1);
      log_hooks += std::log(2.0 * (arm + 1.0) + leg);
    }
  }
  return k * std::log(2.0) + std::lgamma(k + 1.0) - log_hooks;
}

struct ZonalTable {
  std::vector<Parts> partitions;  // weight k, length <= maxlen, lex descending
  // Per partition kappa: sparse row of final C-normalized coefficients over
  // the monomial basis (indices into `partitions`).
  std::vector<std::vector<std::pair<int, double>>> rows;
};

ZonalTable build_table(int maxlen, int weight) {
  ZonalTable table;
  if (weight == 0) {
    table.partitions.push_back({});
    table.rows.push_back({{0, 1.0}});
    return table;
  }
  Parts scratch;
  enumerate_partitions(weight, weight, maxlen, scratch, table.partitions);
  // Lex-descending order is a linear extension of dominance: coefficients of
  // lambda only need mu that come earlier in the list.
  std::sort(table.partitions.begin(), table.partitions.end(),
            [](const Parts& a, const Parts& b) { return a > b; });

  std::map<Parts, int> index;
  for (std::size_t i = 0; i < table.partitions.size(); ++i) {
    index[table.partitions[i]] = static_cast<int>(i);
  }

  const std::size_t n = table.partitions.size();
  table.rows.resize(n);
  // jack[ik][il] = c_{kappa lambda} for kappa = partitions[ik].
  std::vector<std::vector<double>> jack(n, std::vector<double>(n, 0.0));

  for (std::size_t ik = 0; ik < n; ++ik) {
    const Parts& kappa = table.partitions[ik];
    const double rho_kappa = rho(kappa);
    jack[ik][ik] = 1.0;
    for (std::size_t il = ik + 1; il < n; ++il) {
      const Parts& lambda = table.partitions[il];
      if (!dominated(lambda, kappa)) continue;
      double acc = 0.0;
      for (std::size_t j = 1; j < lambda.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i) {
          for (int t = 1; t <= lambda[j]; ++t) {
            Parts mu = lambda;
            mu[i] += t;
            mu[j] -= t;
            std::sort(mu.begin(), mu.end(), std::greater<int>());
            while (!mu.empty() && mu.back() == 0) mu.pop_back();
            const auto it = index.find(mu);
            if (it == index.end()) continue;  // length exceeded maxlen
            if (!dominated(mu, kappa)) continue;
            const double coeff = jack[ik][it->second];
            if (coeff == 0.0) continue;
            acc += coeff * ((lambda[i] + t) - (lambda[j] - t));
          }
        }
      }
      if (acc != 0.0) jack[ik][il] = acc / (rho_kappa - rho(lambda));
    }
    const double norm = std::exp(log_norm_constant(kappa));
    auto& row = table.rows[ik];
    for (std::size_t il = ik; il < n; ++il) {
      if (jack[ik][il] != 0.0) {
        row.emplace_back(static_cast<int>(il), norm * jack[ik][il]);
      }
    }
  }
  return table;
}

const ZonalTable& cached_table(int maxlen, int weight) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<ZonalTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{maxlen, weight}];
  if (!slot) slot = std::make_unique<ZonalTable>(build_table(maxlen, weight));
  return *slot;
}

// Monomial symmetric polynomial m_lambda at the given values (distinct
// permutations of the padded exponent vector).
double monomial_sym(const Parts& lambda, const Vector& x) {
  const std::size_t d = static_cast<std::size_t>(x.size());
  if (lambda.size() > d) return 0.0;
  std::vector<int> expo(d, 0);
  std::copy(lambda.begin(), lambda.end(), expo.begin());
  std::sort(expo.begin(), expo.end());
  double total = 0.0;
  do {
    double term = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (expo[i] != 0) term *= std::pow(x(static_cast<Eigen::Index>(i)), expo[i]);
    }
    total += term;
  } while (std::next_permutation(expo.begin(), expo.end()));
  return total;
}

// All C_kappa values of one weight at the given eigenvalues, aligned with
// the table's partition order.
std::vector<double> zonal_block(int d, int weight, const Vector& eigs) {
  const ZonalTable& table = cached_table(d, weight);
  std::vector<double> monomials(table.partitions.size());
  for (std::size_t i = 0; i < table.partitions.size(); ++i) {
    monomials[i] = monomial_sym(table.partitions[i], eigs);
  }
  std::vector<double> values(table.partitions.size(), 0.0);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    double acc = 0.0;
    for (const auto& [idx, coeff] : table.rows[i]) {
      acc += coeff * monomials[idx];
    }
    values[i] = acc;
  }
  return values;
}

Vector psd_eigenvalues(const PsdMatrix& xi) {
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.compute(xi.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseMax(0.0);
}

}  // namespace

Partition Partition::of(std::vector<int> parts) {
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] < 0 || (i > 0 && parts[i] > parts[i - 1])) {
      raise(errc::invalid_params,
            "partition parts must be nonincreasing and >= 0");
    }
  }
  while (!parts.empty() && parts.back() == 0) parts.pop_back();
  return Partition{std::move(parts)};
}

int Partition::weight() const { return parts_weight(parts); }

int Partition::length() const { return static_cast<int>(parts.size()); }

double log_mv_gamma(int d, double p) {
  if (d < 1) raise(errc::shape_error, "mv_gamma: dimension must be >= 1");
  double acc = 0.25 * d * (d - 1) * std::log(M_PI);
  for (int j = 1; j <= d; ++j) {
    const double arg = p - (j - 1) / 2.0;
    if (arg <= 0.0) {
      raise(errc::pole_error, "mv_gamma: gamma argument " +
                                  std::to_string(arg) + " at a pole");
    }
    acc += std::lgamma(arg);
  }
  return acc;
}

double mv_gamma(int d, double p) { return std::exp(log_mv_gamma(d, p)); }

double pochhammer_partition(double p, const Partition& kappa) {
  double acc = 1.0;
  for (std::size_t j = 0; j < kappa.parts.size(); ++j) {
    const double base = p - static_cast<double>(j) / 2.0;
    for (int c = 0; c < kappa.parts[j]; ++c) acc *= base + c;
  }
  return acc;
}

double zonal(const Partition& kappa, const PsdMatrix& xi, int max_weight) {
  const int k = kappa.weight();
  if (k > max_weight) {
    raise(errc::weight_overflow,
          "zonal: |kappa| = " + std::to_string(k) + " exceeds max weight " +
              std::to_string(max_weight));
  }
  const int d = static_cast<int>(xi.dim());
  if (kappa.length() > d) return 0.0;  // vanishes in d variables
  if (k == 0) return 1.0;
  const Vector eigs = psd_eigenvalues(xi);
  const ZonalTable& table = cached_table(d, k);
  const auto it = std::find(table.partitions.begin(), table.partitions.end(),
                            kappa.parts);
  const std::vector<double> block = zonal_block(d, k, eigs);
  return block[static_cast<std::size_t>(
      std::distance(table.partitions.begin(), it))];
}

DensityResult density(const WishartParams& params, const PsdMatrix& xi,
                      int max_terms, double tol) {
  const int d = static_cast<int>(params.dim());
  if (xi.dim() != d) raise(errc::shape_error, "density: xi dimension mismatch");
  if (max_terms < 0) raise(errc::invalid_params, "density: max_terms < 0");
  if (!(params.p > (d - 1) / 2.0)) {
    raise(errc::hypothesis_violation,
          "density requires p > (d-1)/2; the law has no density otherwise");
  }
  if (rank_tol(params.sigma.sym()) != d) {
    raise(errc::hypothesis_violation,
          "density requires invertible sigma; degenerate scales put the law "
          "on a lower-dimensional set");
  }

  Eigen::LLT<Matrix> sigma_llt(params.sigma.mat());
  if (sigma_llt.info() != Eigen::Success) {
    raise(errc::hypothesis_violation, "density: sigma Cholesky failed");
  }
  const Matrix sigma_inv = sigma_llt.solve(Matrix::Identity(d, d));
  const double logdet_sigma =
      2.0 * sigma_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

  // Noncentrality core a = sigma^-1 omega sigma^-1 and series argument
  // sqrt(a) xi sqrt(a).
  const PsdMatrix a =
      PsdMatrix::trusted(sigma_inv * params.omega.mat() * sigma_inv);
  const Matrix a_half = sqrt_psd(a).mat();
  const PsdMatrix series_arg =
      PsdMatrix::trusted(a_half * xi.mat() * a_half);
  const Vector series_eigs = psd_eigenvalues(series_arg);

  const double expo = params.p - (d + 1) / 2.0;
  const Vector xi_eigs = psd_eigenvalues(xi);
  const double xi_top = xi_eigs.maxCoeff();
  double logdet_xi = 0.0;
  bool xi_singular = false;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (xi_eigs(i) <= kRankRelTol * xi_top || xi_eigs(i) == 0.0) {
      xi_singular = true;
    } else {
      logdet_xi += std::log(xi_eigs(i));
    }
  }
  if (xi_singular) {
    if (expo > 0.0) return {0.0, 0, 0.0};
    if (expo < 0.0) {
      return {std::numeric_limits<double>::infinity(), 0, 0.0};
    }
    logdet_xi = 0.0;  // det^0 on the boundary
  }

  const double log_pre = -params.p * logdet_sigma -
                         (sigma_inv * xi.mat()).trace() -
                         (params.sigma.mat() * a.mat()).trace() +
                         expo * logdet_xi - log_mv_gamma(d, params.p);

  // Weight-block summation with a geometric tail bound from the last three
  // block magnitudes.
  double series = 0.0;
  double prev2 = 0.0, prev1 = 0.0;
  int blocks = 0;
  double tail = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= max_terms; ++m) {
    const ZonalTable& table = cached_table(d, m);
    const std::vector<double> c_values = zonal_block(d, m, series_eigs);
    double block = 0.0;
    const double log_mfact = std::lgamma(m + 1.0);
    for (std::size_t i = 0; i < table.partitions.size(); ++i) {
      if (c_values[i] == 0.0) continue;
      const Partition kappa{table.partitions[i]};
      block += c_values[i] / std::exp(log_mfact) /
               pochhammer_partition(params.p, kappa);
    }
    series += block;
    ++blocks;
    if (m >= 2) {
      const double r1 = prev1 > 0.0 ? block / prev1 : 0.0;
      const double r2 = prev2 > 0.0 ? prev1 / prev2 : 0.0;
      const double ratio = std::max(r1, r2);
      if (ratio >= 1.0) {
        tail = std::numeric_limits<double>::infinity();
      } else {
        tail = std::exp(log_pre) * block * ratio / (1.0 - ratio);
        if (tail < tol) {
          prev2 = prev1;
          prev1 = block;
          break;
        }
      }
    }
    prev2 = prev1;
    prev1 = block;
  }

  DensityResult result;
  result.value = std::exp(log_pre) * series;
  result.terms_used = blocks;
  result.tail_estimate = tail;
  return result;
}

DensityResult transition_density(const ProcessParams& process, double t,
                                 const PsdMatrix& x, const PsdMatrix& xi,
                                 int max_terms, double tol) {
  if (!(t > 0.0)) {
    raise(errc::invalid_params, "transition_density: time must be > 0");
  }
  if (!transition_density_exists(process)) {
    raise(errc::no_density,
          "transition densities need p > (d-1)/2 and maximal Kalman rank");
  }
  const PsdMatrix omega_t = omega_flow(process.beta, x, t);
  const PsdMatrix sigma_t = sigma_flow(process.beta, process.alpha, t);
  const WishartParams law =
      WishartParams::make(process.p, omega_t, sigma_t);
  return density(law, xi, max_terms, tol);
}

}  // namespace wishartlab
