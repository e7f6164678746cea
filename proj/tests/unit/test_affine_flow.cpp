#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "wishartlab/affine_flow.hpp"

using namespace wishartlab;
using wltest::max_abs_diff;

namespace {

ProcessParams bm_process(double p, Eigen::Index d) {
    // beta = 0, Q = I: sigma_t = 2 t I and everything has closed forms.
    return ProcessParams::make(p, Matrix::Zero(d, d), Matrix::Identity(d, d));
}

// Composite Simpson on [0, t] for 2 e^{beta s} alpha e^{beta^T s},
// independent of the implementation's Van Loan and Gauss-Legendre routes.
Matrix simpson_sigma(const Matrix& beta, const Matrix& alpha, double t,
                     int intervals) {
    auto f = [&](double s) {
        Matrix e = matrix_exp(beta * s);
        return Matrix(2.0 * e * alpha * e.transpose());
    };
    const double h = t / intervals;
    Matrix acc = f(0.0) + f(t);
    for (int k = 1; k < intervals; ++k)
        acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
    return Matrix(acc * h / 3.0);
}

}  // namespace

TEST_CASE("omega_flow closed forms") {
    // Scalar: x e^{2 beta t}.
    Matrix b1(1, 1), x1(1, 1);
    b1 << 0.7;
    x1 << 2.0;
    CHECK(omega_flow(b1, PsdMatrix::validated(x1), 1.3).mat()(0, 0) ==
          doctest::Approx(2.0 * std::exp(2.0 * 0.7 * 1.3)).epsilon(1e-13));

    // Diagonal drift acts entrywise: (x_t)_ij = x_ij e^{(b_i + b_j) t}.
    Matrix bd = Matrix::Zero(2, 2);
    bd(0, 0) = -0.5;
    bd(1, 1) = 0.3;
    Matrix x(2, 2);
    x << 2.0, 0.7, 0.7, 1.0;
    const double t = 0.9;
    Matrix got = omega_flow(bd, PsdMatrix::validated(x), t).mat();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(got(i, j) ==
                  doctest::Approx(x(i, j) *
                                  std::exp((bd(i, i) + bd(j, j)) * t))
                      .epsilon(1e-13));

    CHECK(max_abs_diff(omega_flow(bd, PsdMatrix::validated(x), 0.0).mat(), x) <
          1e-15);
}

TEST_CASE("sigma_flow closed forms and quadrature oracle") {
    // Scalar beta = alpha = 1: 2 int_0^1 e^{2s} ds = e^2 - 1.
    Matrix one(1, 1);
    one << 1.0;
    CHECK(sigma_flow(one, PsdMatrix::validated(one), 1.0).mat()(0, 0) ==
          doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-12));

    // Zero drift: sigma_t = 2 t alpha exactly.
    Matrix alpha(2, 2);
    alpha << 1.0, 0.3, 0.3, 2.0;
    PsdMatrix a = PsdMatrix::validated(alpha);
    CHECK(max_abs_diff(sigma_flow(Matrix::Zero(2, 2), a, 0.75).mat(),
                       1.5 * alpha) < 1e-12);

    // Diagonal drift: entrywise 2 a_ij (e^{(b_i+b_j) t} - 1) / (b_i + b_j).
    Matrix bd = Matrix::Zero(2, 2);
    bd(0, 0) = -0.5;
    bd(1, 1) = 0.3;
    const double t = 1.25;
    Matrix got = sigma_flow(bd, a, t).mat();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double rate = bd(i, i) + bd(j, j);
            const double want =
                2.0 * alpha(i, j) * (std::exp(rate * t) - 1.0) / rate;
            CHECK(got(i, j) == doctest::Approx(want).epsilon(1e-11));
        }

    // Non-normal drift against an independent Simpson evaluation.
    Matrix bn(2, 2);
    bn << -0.5, 1.0, 0.0, -0.2;
    Matrix want = simpson_sigma(bn, alpha, 2.0, 2000);
    CHECK(max_abs_diff(sigma_flow(bn, a, 2.0).mat(), want) < 1e-9);

    CHECK(max_abs_diff(sigma_flow(bn, a, 0.0).mat(), Matrix::Zero(2, 2)) ==
          0.0);
    CHECK_RAISES(errc::invalid_params, sigma_flow(bn, a, -0.1));
}

TEST_CASE("sigma_flow satisfies the cocycle identity") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix beta = wltest::rand_matrix(3, rng, 0.6);
        PsdMatrix alpha = wltest::rand_pd(3, rng);
        const double t = 0.8, s = 0.5;
        // 2 int_0^{t+s} = 2 int_0^s + e^{beta s} (2 int_0^t) e^{beta^T s}.
        Matrix es = matrix_exp(beta * s);
        Matrix combined = sigma_flow(beta, alpha, s).mat() +
                          es * sigma_flow(beta, alpha, t).mat() *
                              es.transpose();
        Matrix direct = sigma_flow(beta, alpha, t + s).mat();
        CHECK(max_abs_diff(direct, combined) <
              1e-10 * (1.0 + direct.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("flow_pair scalar pinned values") {
    // p = 1, beta = 0, Q = 1, t = 1: sigma_t = 2, so with u = 1
    // phi = log 3 and psi = 1/3; the transform from x = 1 is e^{-1/3}/3.
    ProcessParams pr = bm_process(1.0, 1);
    FlowPair fp = flow_pair(pr, 1.0, PsdMatrix::identity(1));
    CHECK(fp.phi == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(fp.psi.mat()(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(transition_laplace(pr, 1.0, PsdMatrix::identity(1),
                             PsdMatrix::identity(1)) ==
          doctest::Approx(std::exp(-1.0 / 3.0) / 3.0).epsilon(1e-14));

    // t = 0 is the identity: phi = 0, psi = u.
    FlowPair id = flow_pair(pr, 0.0, PsdMatrix::identity(1));
    CHECK(id.phi == doctest::Approx(0.0));
    CHECK(id.psi.mat()(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("flow_pair matches the dense resolvent for singular u") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        ProcessParams pr = ProcessParams::make(
            1.3, wltest::rand_matrix(3, rng, 0.5), wltest::rand_matrix(3, rng));
        PsdMatrix u = wltest::rand_psd_rank(3, 1, rng);
        const double t = 0.6;
        FlowPair fp = flow_pair(pr, t, u);

        // Direct dense route, valid because I + sigma_t u is invertible.
        Matrix st = sigma_flow(pr.beta, pr.alpha, t).mat();
        Matrix resolvent =
            (Matrix::Identity(3, 3) + st * u.mat()).inverse();
        Matrix core = u.mat() * resolvent;
        Matrix ebt = matrix_exp(pr.beta * t);
        Matrix psi_dense = ebt.transpose() * core * ebt;
        double phi_dense =
            pr.p * std::log((Matrix::Identity(3, 3) + u.mat() * st)
                                .determinant());

        CHECK(fp.phi == doctest::Approx(phi_dense).epsilon(1e-10));
        CHECK(max_abs_diff(fp.psi.mat(),
                           (psi_dense + psi_dense.transpose()) / 2.0) <
              1e-10);
    }
}

TEST_CASE("flow pair solves the Riccati system in finite differences") {
    std::mt19937_64 rng(37);
    const double h = 1e-4;
    for (int rep = 0; rep < 8; ++rep) {
        ProcessParams pr = ProcessParams::make(
            0.9 + rep * 0.3, wltest::rand_matrix(2, rng, 0.5),
            wltest::rand_matrix(2, rng, 0.8));
        PsdMatrix u = wltest::rand_pd(2, rng, 0.7);
        for (double t : {0.1, 1.0}) {
            FlowPair lo = flow_pair(pr, t - h, u);
            FlowPair mid = flow_pair(pr, t, u);
            FlowPair hi = flow_pair(pr, t + h, u);

            const double phi_dot = (hi.phi - lo.phi) / (2.0 * h);
            const Matrix psi_dot = (hi.psi.mat() - lo.psi.mat()) / (2.0 * h);

            const Matrix& psi = mid.psi.mat();
            const Matrix& a = pr.alpha.mat();
            const double phi_rhs = 2.0 * pr.p * (a * psi).trace();
            const Matrix psi_rhs = -2.0 * psi * a * psi + psi * pr.beta +
                                   pr.beta.transpose() * psi;

            CHECK(std::abs(phi_dot - phi_rhs) < 1e-6);
            CHECK(max_abs_diff(psi_dot, psi_rhs) < 1e-6);
        }
    }
}

TEST_CASE("flow pair composes as a semiflow") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        ProcessParams pr = ProcessParams::make(
            1.1, wltest::rand_matrix(3, rng, 0.4), wltest::rand_matrix(3, rng));
        PsdMatrix u = wltest::rand_pd(3, rng, 0.5);
        const double t = 0.7, s = 0.4;

        FlowPair at_t = flow_pair(pr, t, u);
        FlowPair chained = flow_pair(pr, s, at_t.psi);
        FlowPair direct = flow_pair(pr, t + s, u);

        CHECK(std::abs(direct.phi - (at_t.phi + chained.phi)) < 1e-10);
        CHECK(max_abs_diff(direct.psi.mat(), chained.psi.mat()) < 1e-10);
    }
}

TEST_CASE("generator matches closed form and the transform derivative") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 6; ++rep) {
        ProcessParams pr = ProcessParams::make(
            1.4, wltest::rand_matrix(2, rng, 0.5), wltest::rand_matrix(2, rng));
        PsdMatrix u = wltest::rand_pd(2, rng, 0.6);
        PsdMatrix x = wltest::rand_pd(2, rng);

        const double got = generator_on_exponential(pr, u, x);

        // Closed form: -f (2p tr(alpha u) + tr((-2 u alpha u + u beta
        // + beta^T u) x)).
        const Matrix& a = pr.alpha.mat();
        const Matrix& um = u.mat();
        const double f = std::exp(-(um * x.mat()).trace());
        const Matrix bracket = -2.0 * um * a * um + um * pr.beta +
                               pr.beta.transpose() * um;
        const double closed =
            -f * (2.0 * pr.p * (a * um).trace() + (bracket * x.mat()).trace());
        CHECK(got == doctest::Approx(closed).epsilon(1e-10));

        // One-sided second order stencil of t -> E_x e^{-tr(u X_t)} at 0+,
        // (-3 g(0) + 4 g(h) - g(2h)) / (2h).
        const double h = 1e-5;
        const double g0 = transition_laplace(pr, 0.0, u, x);
        const double g1 = transition_laplace(pr, h, u, x);
        const double g2 = transition_laplace(pr, 2.0 * h, u, x);
        const double fd = (-3.0 * g0 + 4.0 * g1 - g2) / (2.0 * h);
        CHECK(std::abs(got - fd) < 1e-6 * (1.0 + std::abs(got)));
    }
}

TEST_CASE("transition_laplace range and monotonicity in u") {
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::Index d = 1 + rep % 3;
        ProcessParams pr = ProcessParams::make(
            0.9 + 0.2 * rep, wltest::rand_matrix(d, rng, 0.5),
            wltest::rand_matrix(d, rng, 0.8));
        PsdMatrix u = wltest::rand_pd(d, rng, 0.7);
        PsdMatrix x = wltest::rand_pd(d, rng);
        const double t = 0.3 + 0.2 * (rep % 4);

        // A transform of a PSD-valued random variable at PSD u: a value in
        // (0, 1], equal to 1 only when the exponent vanishes.
        double prev = transition_laplace(pr, t, PsdMatrix::zero(d), x);
        CHECK(prev == doctest::Approx(1.0).epsilon(1e-14));

        // Decreasing along the ray c -> c u, c increasing.
        for (double c : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            const double cur = transition_laplace(
                pr, t, PsdMatrix::trusted(c * u.mat()), x);
            CHECK(cur > 0.0);
            CHECK(cur <= 1.0);
            CHECK(cur < prev + 1e-15);
            prev = cur;
        }
    }
}
