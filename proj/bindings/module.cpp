// Python bindings: thin functional wrappers over the C++ core. Matrices
// cross the boundary as numpy arrays through pybind11's Eigen caster.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "wishartlab/affine_flow.hpp"
#include "wishartlab/density.hpp"
#include "wishartlab/sde_sim.hpp"
#include "wishartlab/validity.hpp"
#include "wishartlab/wishart_dist.hpp"

namespace py = pybind11;
using namespace wishartlab;

namespace {

WishartParams make_params(double p, const Matrix& omega, const Matrix& sigma) {
    return WishartParams::make(p, PsdMatrix::validated(omega),
                               PsdMatrix::validated(sigma));
}

ProcessParams make_process(double p, const Matrix& beta, const Matrix& q) {
    return ProcessParams::make(p, beta, q);
}

py::array_t<double> stack_draws(const std::vector<PsdMatrix>& draws) {
    const auto n = static_cast<py::ssize_t>(draws.size());
    const auto d = static_cast<py::ssize_t>(n > 0 ? draws[0].dim() : 0);
    py::array_t<double> out({n, d, d});
    auto view = out.mutable_unchecked<3>();
    for (py::ssize_t i = 0; i < n; ++i)
        for (py::ssize_t r = 0; r < d; ++r)
            for (py::ssize_t c = 0; c < d; ++c)
                view(i, r, c) = draws[static_cast<std::size_t>(i)].mat()(r, c);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Wishart distributions and processes on the psd cone";

    py::register_exception<Error>(m, "WishartError");

    m.def("gindikin_contains", &gindikin_contains, py::arg("d"), py::arg("p"),
          py::arg("tol") = 1e-12,
          "Membership of p in the admissible shape set for dimension d.");

    m.def(
        "classify",
        [](double p, const Matrix& omega, const Matrix& sigma) {
            const Verdict v = classify_wishart(make_params(p, omega, sigma));
            return py::dict(py::arg("status") = validity_name(v.status),
                            py::arg("rule_id") = v.rule_id,
                            py::arg("reason") = v.reason);
        },
        py::arg("p"), py::arg("omega"), py::arg("sigma"),
        "Existence verdict for the parameter triple.");

    m.def(
        "laplace",
        [](double p, const Matrix& omega, const Matrix& sigma,
           const Matrix& u) {
            return laplace(make_params(p, omega, sigma), SymMatrix::from(u));
        },
        py::arg("p"), py::arg("omega"), py::arg("sigma"), py::arg("u"),
        "Transform value det(I + sigma u)^-p exp(-tr(u (I+sigma u)^-1 omega)).");

    m.def(
        "mean",
        [](double p, const Matrix& omega, const Matrix& sigma) {
            return Matrix(mean(make_params(p, omega, sigma)).mat());
        },
        py::arg("p"), py::arg("omega"), py::arg("sigma"));

    m.def(
        "sample",
        [](double p, const Matrix& omega, const Matrix& sigma, std::size_t n,
           std::uint64_t seed, const std::optional<std::string>& method,
           int threads) {
            std::optional<SampleMethod> force;
            if (method.has_value()) {
                if (*method == "GaussianSum") {
                    force = SampleMethod::gaussian_sum;
                } else if (*method == "BartlettComposite") {
                    force = SampleMethod::bartlett_composite;
                } else {
                    raise(errc::config_error,
                          "unknown method '" + *method + "'");
                }
            }
            SampleBatch batch =
                sample(make_params(p, omega, sigma), n, seed, force, threads);
            return py::make_tuple(stack_draws(batch.draws),
                                  sample_method_name(batch.method));
        },
        py::arg("p"), py::arg("omega"), py::arg("sigma"), py::arg("n"),
        py::arg("seed"), py::arg("method") = std::nullopt,
        py::arg("threads") = 1,
        "Exact draws as an (n, d, d) array plus the method used.");

    m.def(
        "density",
        [](double p, const Matrix& omega, const Matrix& sigma,
           const Matrix& xi, int max_terms, double tol) {
            const DensityResult r = density(make_params(p, omega, sigma),
                                            PsdMatrix::validated(xi),
                                            max_terms, tol);
            return py::make_tuple(r.value, r.terms_used, r.tail_estimate);
        },
        py::arg("p"), py::arg("omega"), py::arg("sigma"), py::arg("xi"),
        py::arg("max_terms") = 30, py::arg("tol") = 1e-10,
        "Series density value, weight blocks used, tail bound.");

    m.def(
        "zonal",
        [](const std::vector<int>& kappa, const Matrix& xi) {
            return zonal(Partition::of(kappa), PsdMatrix::validated(xi));
        },
        py::arg("kappa"), py::arg("xi"));

    m.def(
        "omega_flow",
        [](const Matrix& beta, const Matrix& x, double t) {
            return Matrix(omega_flow(beta, PsdMatrix::validated(x), t).mat());
        },
        py::arg("beta"), py::arg("x"), py::arg("t"));

    m.def(
        "sigma_flow",
        [](const Matrix& beta, const Matrix& alpha, double t) {
            return Matrix(
                sigma_flow(beta, PsdMatrix::validated(alpha), t).mat());
        },
        py::arg("beta"), py::arg("alpha"), py::arg("t"));

    m.def(
        "flow_pair",
        [](double p, const Matrix& beta, const Matrix& q, double t,
           const Matrix& u) {
            const FlowPair fp =
                flow_pair(make_process(p, beta, q), t, PsdMatrix::validated(u));
            return py::make_tuple(fp.phi, Matrix(fp.psi.mat()));
        },
        py::arg("p"), py::arg("beta"), py::arg("q"), py::arg("t"),
        py::arg("u"), "Exponent pair (phi, psi) of the transition transform.");

    m.def(
        "transition_laplace",
        [](double p, const Matrix& beta, const Matrix& q, double t,
           const Matrix& u, const Matrix& x) {
            return transition_laplace(make_process(p, beta, q), t,
                                      PsdMatrix::validated(u),
                                      PsdMatrix::validated(x));
        },
        py::arg("p"), py::arg("beta"), py::arg("q"), py::arg("t"),
        py::arg("u"), py::arg("x"));

    m.def(
        "transition_density",
        [](double p, const Matrix& beta, const Matrix& q, double t,
           const Matrix& x, const Matrix& xi, int max_terms, double tol) {
            const DensityResult r = transition_density(
                make_process(p, beta, q), t, PsdMatrix::validated(x),
                PsdMatrix::validated(xi), max_terms, tol);
            return py::make_tuple(r.value, r.terms_used, r.tail_estimate);
        },
        py::arg("p"), py::arg("beta"), py::arg("q"), py::arg("t"),
        py::arg("x"), py::arg("xi"), py::arg("max_terms") = 30,
        py::arg("tol") = 1e-10);

    m.def(
        "kalman_rank",
        [](double p, const Matrix& beta, const Matrix& q) {
            return kalman_rank(make_process(p, beta, q));
        },
        py::arg("p"), py::arg("beta"), py::arg("q"));

    m.def(
        "transition_density_exists",
        [](double p, const Matrix& beta, const Matrix& q) {
            return transition_density_exists(make_process(p, beta, q));
        },
        py::arg("p"), py::arg("beta"), py::arg("q"));

    m.def(
        "simulate",
        [](double p, const Matrix& beta, const Matrix& q, const Matrix& x,
           double horizon, std::size_t steps, std::size_t n,
           std::uint64_t seed, double eps, int threads) {
            std::vector<double> grid(steps + 1);
            for (std::size_t s = 0; s <= steps; ++s)
                grid[s] = horizon * static_cast<double>(s) /
                          static_cast<double>(steps);
            SimOptions opts;
            opts.store_stride = steps;  // endpoints only
            opts.threads = threads;
            PathEnsemble paths =
                simulate_euler(make_process(p, beta, q),
                               PsdMatrix::validated(x), grid, n, seed, opts);
            const HittingStats hits = hitting_stats(paths, eps);
            return py::dict(
                py::arg("endpoints") = stack_draws(paths.endpoints()),
                py::arg("hit_fraction") = hits.hit_fraction,
                py::arg("hit_se") = hits.se);
        },
        py::arg("p"), py::arg("beta"), py::arg("q"), py::arg("x"),
        py::arg("T"), py::arg("steps"), py::arg("n"), py::arg("seed"),
        py::arg("eps") = 1e-6, py::arg("threads") = 1,
        "Euler ensemble: endpoint states plus boundary hitting stats.");

    m.def(
        "mc_laplace",
        [](const py::array_t<double>& draws, const Matrix& u) {
            const auto view = draws.unchecked<3>();
            std::vector<PsdMatrix> batch;
            batch.reserve(static_cast<std::size_t>(view.shape(0)));
            const Eigen::Index d = static_cast<Eigen::Index>(view.shape(1));
            for (py::ssize_t i = 0; i < view.shape(0); ++i) {
                Matrix m_i(d, d);
                for (Eigen::Index r = 0; r < d; ++r)
                    for (Eigen::Index c = 0; c < d; ++c)
                        m_i(r, c) = view(i, r, c);
                batch.push_back(PsdMatrix::trusted(std::move(m_i)));
            }
            const McEstimate est = mc_laplace(batch, SymMatrix::from(u));
            return py::make_tuple(est.mean, est.se);
        },
        py::arg("draws"), py::arg("u"),
        "Monte Carlo transform estimate (mean, se) over an (n, d, d) stack.");
}
