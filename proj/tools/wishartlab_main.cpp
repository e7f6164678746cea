// wishartlab: batch front door for the distribution/process library.
//
// Subcommands read a JSON config, print a JSON report on stdout (header
// block with schema_version/command/timestamp, result block with the
// payload) and write bulk numeric artifacts as CSV next to --out-dir.
// Every failure surfaces as {"error": {code, message}} with a nonzero exit:
// 2 for configuration problems, 1 for propagated module errors.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wishartlab/affine_flow.hpp"
#include "wishartlab/density.hpp"
#include "wishartlab/json_io.hpp"
#include "wishartlab/sde_sim.hpp"
#include "wishartlab/validity.hpp"
#include "wishartlab/wishart_dist.hpp"

namespace wl = wishartlab;
using wl::json;

namespace {

constexpr int kSchemaVersion = 1;

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

// Shortest round-trip decimal representation, used for CSV payloads.
std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

json load_config(const GlobalOptions& opts, const char* command) {
    if (opts.config_path.empty()) {
        wl::raise(wl::errc::config_error,
                  std::string("subcommand '") + command +
                      "' needs --config <file>");
    }
    std::ifstream in(opts.config_path);
    if (!in) {
        wl::raise(wl::errc::config_error,
                  "cannot open config file " + opts.config_path);
    }
    json config;
    try {
        in >> config;
    } catch (const json::exception& e) {
        wl::raise(wl::errc::config_error,
                  std::string("config is not valid JSON: ") + e.what());
    }
    if (config.contains("command") &&
        config.at("command").get<std::string>() != command) {
        wl::raise(wl::errc::config_error,
                  "config command '" +
                      config.at("command").get<std::string>() +
                      "' does not match subcommand '" + command + "'");
    }
    return config;
}

double require_number(const json& j, const char* key) {
    const json& field = wl::require_field(j, key);
    if (!field.is_number()) {
        wl::raise(wl::errc::config_error,
                  std::string("field '") + key + "' must be a number");
    }
    return field.get<double>();
}

double positive_number(const json& j, const char* key) {
    const double v = require_number(j, key);
    if (!(v > 0.0)) {
        wl::raise(wl::errc::config_error,
                  std::string("field '") + key + "' must be > 0");
    }
    return v;
}

std::uint64_t config_seed(const json& config, const GlobalOptions& opts,
                          std::uint64_t fallback) {
    if (opts.seed.has_value()) return *opts.seed;
    if (config.contains("seed"))
        return config.at("seed").get<std::uint64_t>();
    return fallback;
}

int worker_threads(const GlobalOptions& opts) {
    if (opts.threads.has_value()) return *opts.threads;
    if (const char* env = std::getenv("WISHARTLAB_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            wl::raise(wl::errc::config_error,
                      "WISHARTLAB_THREADS is not an integer");
        }
    }
    return 1;
}

std::string artifact_path(const GlobalOptions& opts, const std::string& name) {
    if (name.empty() || name.front() == '/') return name;
    if (opts.out_dir.empty() || opts.out_dir == ".") return name;
    return opts.out_dir + "/" + name;
}

std::vector<double> uniform_grid(double horizon, double dt) {
    const double steps_real = horizon / dt;
    const auto steps = static_cast<std::size_t>(std::llround(steps_real));
    if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9) {
        wl::raise(wl::errc::config_error,
                  "T must be a positive integer multiple of dt");
    }
    std::vector<double> grid(steps + 1);
    for (std::size_t m = 0; m < steps; ++m)
        grid[m] = dt * static_cast<double>(m);
    grid[steps] = horizon;
    return grid;
}

std::vector<wl::PsdMatrix> parse_u_grid(const json& config) {
    std::vector<wl::PsdMatrix> us;
    if (!config.contains("u_grid")) return us;
    const json& grid = config.at("u_grid");
    if (!grid.is_array()) {
        wl::raise(wl::errc::config_error, "u_grid must be an array of matrices");
    }
    for (const json& item : grid) us.push_back(wl::psd_from_json(item));
    return us;
}

void write_upper_triangle_header(std::ostream& out, Eigen::Index d,
                                 bool trailing_comma) {
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            out << "x_" << i << "_" << j;
            if (!(i == d - 1 && j == d - 1) || trailing_comma) out << ',';
        }
    }
}

void write_upper_triangle(std::ostream& out, const wl::Matrix& x,
                          bool trailing_comma) {
    const Eigen::Index d = x.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            out << format_double(x(i, j));
            if (!(i == d - 1 && j == d - 1) || trailing_comma) out << ',';
        }
    }
}

json header_block(const char* command, std::uint64_t seed, int threads) {
    return json{{"schema_version", kSchemaVersion},
                {"command", command},
                {"timestamp", iso_timestamp()},
                {"seed", seed},
                {"threads", threads}};
}

// ---------------------------------------------------------------------------
// Subcommand payloads.
// ---------------------------------------------------------------------------

json run_validate(const json& config) {
    wl::WishartParams params =
        wl::wishart_params_from_json(wl::require_field(config, "params"));
    return wl::to_json(wl::classify_wishart(params));
}

json run_laplace(const json& config) {
    wl::ProcessParams process =
        wl::process_params_from_json(wl::require_field(config, "process"));
    const double t = require_number(config, "t");
    wl::PsdMatrix u = wl::psd_from_json(wl::require_field(config, "u"));
    wl::PsdMatrix x = wl::psd_from_json(wl::require_field(config, "x"));
    wl::FlowPair fp = wl::flow_pair(process, t, u);
    return json{{"phi", fp.phi},
                {"psi", wl::to_json(fp.psi.mat())},
                {"laplace", wl::transition_laplace(process, t, u, x)}};
}

json run_density(const json& config) {
    wl::WishartParams params =
        wl::wishart_params_from_json(wl::require_field(config, "params"));
    wl::PsdMatrix xi = wl::psd_from_json(wl::require_field(config, "xi"));
    const int max_terms =
        config.contains("max_terms") ? config.at("max_terms").get<int>() : 30;
    const double tol =
        config.contains("tol") ? config.at("tol").get<double>() : 1e-10;
    return wl::to_json(wl::density(params, xi, max_terms, tol));
}

json run_sample(const json& config, const GlobalOptions& opts,
                std::uint64_t seed, int threads) {
    wl::WishartParams params =
        wl::wishart_params_from_json(wl::require_field(config, "params"));
    const auto n = static_cast<std::size_t>(positive_number(config, "n"));
    std::optional<wl::SampleMethod> force;
    if (config.contains("method")) {
        const std::string name = config.at("method").get<std::string>();
        if (name == "GaussianSum") {
            force = wl::SampleMethod::gaussian_sum;
        } else if (name == "BartlettComposite") {
            force = wl::SampleMethod::bartlett_composite;
        } else {
            wl::raise(wl::errc::config_error, "unknown method '" + name + "'");
        }
    }
    wl::SampleBatch batch = wl::sample(params, n, seed, force, threads);

    const std::string out_name =
        wl::require_field(config, "out").get<std::string>();
    const std::string path = artifact_path(opts, out_name);
    std::ofstream csv(path);
    if (!csv) {
        wl::raise(wl::errc::config_error, "cannot write CSV to " + path);
    }
    write_upper_triangle_header(csv, params.dim(), false);
    csv << '\n';
    for (const wl::PsdMatrix& draw : batch.draws) {
        write_upper_triangle(csv, draw.mat(), false);
        csv << '\n';
    }
    return json{{"n", n},
                {"method", wl::sample_method_name(batch.method)},
                {"csv", path}};
}

wl::PathEnsemble simulate_from_config(const json& config, std::uint64_t seed,
                                      int threads, wl::Scheme* scheme_out) {
    wl::ProcessParams process =
        wl::process_params_from_json(wl::require_field(config, "process"));
    const double horizon = positive_number(config, "T");
    const double dt = positive_number(config, "dt");
    const auto n = static_cast<std::size_t>(positive_number(config, "n"));
    const std::vector<double> grid = uniform_grid(horizon, dt);

    wl::SimOptions sim_opts;
    sim_opts.threads = threads;
    if (config.contains("store_stride"))
        sim_opts.store_stride = config.at("store_stride").get<std::size_t>();

    std::string scheme = config.contains("scheme")
                             ? config.at("scheme").get<std::string>()
                             : "euler";
    if (scheme == "euler") {
        if (scheme_out) *scheme_out = wl::Scheme::euler;
        wl::PsdMatrix x = wl::psd_from_json(wl::require_field(config, "x"));
        return wl::simulate_euler(process, x, grid, n, seed, sim_opts);
    }
    if (scheme == "ou_squares") {
        if (scheme_out) *scheme_out = wl::Scheme::ou_squares;
        const json& factors = wl::require_field(config, "factors");
        if (!factors.is_array()) {
            wl::raise(wl::errc::config_error,
                      "factors must be an array of vectors");
        }
        std::vector<wl::Vector> y;
        for (const json& f : factors) {
            wl::Vector v(static_cast<Eigen::Index>(f.size()));
            for (std::size_t i = 0; i < f.size(); ++i)
                v(static_cast<Eigen::Index>(i)) = f.at(i).get<double>();
            y.push_back(std::move(v));
        }
        return wl::simulate_ou_squares(process, y, grid, n, seed, sim_opts);
    }
    wl::raise(wl::errc::config_error,
              "scheme must be 'euler' or 'ou_squares', got '" + scheme + "'");
}

json run_simulate(const json& config, const GlobalOptions& opts,
                  std::uint64_t seed, int threads) {
    wl::Scheme scheme = wl::Scheme::euler;
    wl::PathEnsemble paths = simulate_from_config(config, seed, threads, &scheme);

    const std::string out_name =
        wl::require_field(config, "out").get<std::string>();
    const std::string path = artifact_path(opts, out_name);
    std::ofstream csv(path);
    if (!csv) {
        wl::raise(wl::errc::config_error, "cannot write CSV to " + path);
    }
    const Eigen::Index d = paths.x0.dim();
    csv << "path,step,t,";
    write_upper_triangle_header(csv, d, true);
    csv << "min_eig\n";
    for (std::size_t p = 0; p < paths.paths(); ++p) {
        for (std::size_t s = 0; s < paths.stored_steps.size(); ++s) {
            const std::size_t step = paths.stored_steps[s];
            csv << p << ',' << step << ',' << format_double(paths.grid[step])
                << ',';
            write_upper_triangle(csv, paths.states[p][s].mat(), true);
            csv << format_double(paths.min_eig[p][step]) << '\n';
        }
    }

    const double eps =
        config.contains("eps") ? config.at("eps").get<double>() : 1e-6;
    wl::HittingStats hits = wl::hitting_stats(paths, eps);

    json endpoint_checks = json::array();
    std::vector<wl::PsdMatrix> endpoints = paths.endpoints();
    for (const wl::PsdMatrix& u : parse_u_grid(config)) {
        wl::McEstimate est = wl::mc_laplace(endpoints, u.sym());
        json entry{{"u", wl::to_json(u.mat())},
                   {"mc_mean", est.mean},
                   {"mc_se", est.se},
                   {"transition_laplace",
                    wl::transition_laplace(paths.process, paths.grid.back(), u,
                                           paths.x0)}};
        endpoint_checks.push_back(std::move(entry));
    }

    return json{{"scheme", wl::scheme_name(scheme)},
                {"paths", paths.paths()},
                {"steps", paths.grid.size() - 1},
                {"stored_steps", paths.stored_steps.size()},
                {"csv", path},
                {"hit_fraction", hits.hit_fraction},
                {"hit_se", hits.se},
                {"eps", eps},
                {"endpoint_laplace", std::move(endpoint_checks)}};
}

json run_hitprob(const json& config, std::uint64_t seed, int threads) {
    wl::Scheme scheme = wl::Scheme::euler;
    wl::PathEnsemble paths = simulate_from_config(config, seed, threads, &scheme);
    const double eps =
        config.contains("eps") ? config.at("eps").get<double>() : 1e-6;
    wl::HittingStats hits = wl::hitting_stats(paths, eps);
    std::size_t hit_count = 0;
    double first = std::numeric_limits<double>::infinity();
    for (const auto& h : hits.first_hit) {
        if (h.has_value()) {
            ++hit_count;
            first = std::min(first, *h);
        }
    }
    json result{{"scheme", wl::scheme_name(scheme)},
                {"paths", paths.paths()},
                {"eps", eps},
                {"hits", hit_count},
                {"hit_fraction", hits.hit_fraction},
                {"hit_se", hits.se}};
    if (hit_count > 0) result["earliest_hit_time"] = first;
    return result;
}

json run_girsanov(const json& config, std::uint64_t seed, int threads) {
    wl::ProcessParams source =
        wl::process_params_from_json(wl::require_field(config, "source"));
    wl::ProcessParams target =
        wl::process_params_from_json(wl::require_field(config, "target"));
    wl::PsdMatrix x = wl::psd_from_json(wl::require_field(config, "x"));
    const double horizon = positive_number(config, "T");
    const double dt = positive_number(config, "dt");
    const auto n = static_cast<std::size_t>(positive_number(config, "n"));

    wl::SimOptions sim_opts;
    sim_opts.threads = threads;
    sim_opts.store_stride = std::numeric_limits<std::size_t>::max();
    wl::PathEnsemble paths = wl::simulate_euler(
        source, x, uniform_grid(horizon, dt), n, seed, sim_opts);

    std::vector<wl::PsdMatrix> us = parse_u_grid(config);
    wl::GirsanovReport report = wl::girsanov_weights(paths, target, us);

    json reweighted = json::array();
    for (std::size_t i = 0; i < us.size(); ++i) {
        reweighted.push_back(
            json{{"u", wl::to_json(us[i].mat())},
                 {"mean", report.reweighted_laplace[i]},
                 {"se", report.reweighted_se[i]},
                 {"target_laplace",
                  wl::transition_laplace(target, horizon, us[i], x)}});
    }
    return json{{"paths", n},
                {"mean_weight", report.mean_weight},
                {"se_weight", report.se_weight},
                {"reweighted", std::move(reweighted)}};
}

// ---------------------------------------------------------------------------
// verify: canned cross-checks, exit 0 iff all pass.
// ---------------------------------------------------------------------------

wl::Matrix random_matrix(Eigen::Index d, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    wl::Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = normal(rng);
    return a;
}

wl::PsdMatrix random_pd(Eigen::Index d, std::mt19937_64& rng, double scale) {
    wl::Matrix g = random_matrix(d, rng, scale);
    return wl::PsdMatrix::trusted(g * g.transpose() +
                                  1e-6 * wl::Matrix::Identity(d, d));
}

json check_entry(const char* name, bool pass, double margin, double tolerance,
                 const char* note) {
    return json{{"name", name},
                {"pass", pass},
                {"margin", margin},
                {"tolerance", tolerance},
                {"note", note}};
}

// MC estimates against the closed transform for both exact constructions.
json verify_sampler_vs_laplace(std::uint64_t seed, int threads) {
    double worst = 0.0;
    wl::Vector v(2);
    v << 1.0, 1.0;
    wl::Matrix sg(2, 2);
    sg << 2.0, 0.5, 0.5, 1.0;
    const wl::WishartParams gaussian_params = wl::WishartParams::make(
        1.0, wl::PsdMatrix::trusted(v * v.transpose()),
        wl::PsdMatrix::validated(sg));
    const wl::WishartParams bartlett_params = wl::WishartParams::make(
        1.8, wl::PsdMatrix::trusted(0.5 * v * v.transpose()),
        wl::PsdMatrix::validated(sg));

    std::vector<wl::SymMatrix> us;
    us.push_back(wl::SymMatrix::from(
        (0.3 * wl::Matrix::Identity(2, 2)).eval()));
    wl::Matrix u2(2, 2);
    u2 << 0.5, 0.2, 0.2, 0.4;
    us.push_back(wl::SymMatrix::from(u2));

    for (const wl::WishartParams& params : {gaussian_params, bartlett_params}) {
        wl::SampleBatch batch = wl::sample(params, 20000, seed, std::nullopt,
                                           threads);
        for (const wl::SymMatrix& u : us) {
            wl::McEstimate est = wl::mc_laplace(batch.draws, u);
            const double gap = std::abs(est.mean - wl::laplace(params, u));
            worst = std::max(worst, gap / (4.0 * est.se));
        }
    }
    return check_entry("sampler_vs_laplace", worst <= 1.0, worst, 1.0,
                       "max |mc - closed| / (4 SE) over methods and u");
}

json verify_riccati(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x1eaf);
    const double h = 1e-5;
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::Index d = 1 + rep % 3;
        wl::ProcessParams pr = wl::ProcessParams::make(
            0.8 + 0.1 * rep, random_matrix(d, rng, 0.5),
            random_matrix(d, rng, 0.7));
        wl::PsdMatrix u = random_pd(d, rng, 0.6);
        for (double t : {0.1, 1.0}) {
            wl::FlowPair lo = wl::flow_pair(pr, t - h, u);
            wl::FlowPair mid = wl::flow_pair(pr, t, u);
            wl::FlowPair hi = wl::flow_pair(pr, t + h, u);
            const wl::Matrix& psi = mid.psi.mat();
            const wl::Matrix& a = pr.alpha.mat();
            const double phi_res =
                std::abs((hi.phi - lo.phi) / (2.0 * h) -
                         2.0 * pr.p * (a * psi).trace());
            const wl::Matrix psi_res =
                (hi.psi.mat() - lo.psi.mat()) / (2.0 * h) -
                (-2.0 * psi * a * psi + psi * pr.beta +
                 pr.beta.transpose() * psi);
            worst = std::max({worst, phi_res,
                              psi_res.cwiseAbs().maxCoeff()});
        }
    }
    return check_entry("riccati_residual", worst < 1e-6, worst, 1e-6,
                       "max |FD - flow equations| over random instances");
}

json verify_semiflow(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5e3f);
    double worst = 0.0;
    for (int rep = 0; rep < 30; ++rep) {
        const Eigen::Index d = 1 + rep % 3;
        wl::ProcessParams pr = wl::ProcessParams::make(
            1.1, random_matrix(d, rng, 0.4), random_matrix(d, rng, 0.8));
        wl::PsdMatrix u = random_pd(d, rng, 0.5);
        const double t = 0.7, s = 0.4;
        wl::FlowPair at_t = wl::flow_pair(pr, t, u);
        wl::FlowPair chained = wl::flow_pair(pr, s, at_t.psi);
        wl::FlowPair direct = wl::flow_pair(pr, t + s, u);
        worst = std::max(worst,
                         std::abs(direct.phi - at_t.phi - chained.phi));
        worst = std::max(worst, (direct.psi.mat() - chained.psi.mat())
                                    .cwiseAbs()
                                    .maxCoeff());
    }
    return check_entry("semiflow", worst < 1e-10, worst, 1e-10,
                       "max composition defect over random instances");
}

json verify_zonal(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x2a17u);
    double worst = 0.0;
    for (int d = 1; d <= 3; ++d) {
        for (int rep = 0; rep < 4; ++rep) {
            wl::PsdMatrix xi = random_pd(d, rng, 0.8);
            const double trace = xi.mat().trace();
            for (int k = 1; k <= 6; ++k) {
                double sum = 0.0;
                std::vector<int> cur;
                std::function<void(int, int)> rec = [&](int rem, int maxp) {
                    if (rem == 0) {
                        if (static_cast<int>(cur.size()) <= d) {
                            sum += wl::zonal(wl::Partition::of(cur), xi);
                        }
                        return;
                    }
                    for (int part = std::min(rem, maxp); part >= 1; --part) {
                        cur.push_back(part);
                        rec(rem - part, part);
                        cur.pop_back();
                    }
                };
                rec(k, k);
                const double target = std::pow(trace, k);
                worst = std::max(worst,
                                 std::abs(sum - target) / std::abs(target));
            }
        }
    }
    return check_entry("zonal_normalization", worst < 1e-8, worst, 1e-8,
                       "max relative defect of weight-block trace powers");
}

json verify_kalman(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x4a17u);
    int disagreements = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index d = 1 + rep % 4;
        wl::Matrix q = random_matrix(d, rng, 1.0);
        if (rep % 3 == 0 && d > 1) q.col(0).setZero();
        if (rep % 7 == 0) q.setZero();
        wl::ProcessParams pr =
            wl::ProcessParams::make(1.0, random_matrix(d, rng, 0.8), q);
        wl::KalmanProbe probe = wl::kalman_equiv_probe(pr, 1.0);
        if (probe.rank_maximal != probe.sigma_flow_pd) ++disagreements;
    }
    return check_entry("kalman_equivalence", disagreements == 0,
                       static_cast<double>(disagreements), 0.0,
                       "rank criterion vs sigma_flow positivity disagreements");
}

json run_verify(std::uint64_t seed, int threads, bool* all_pass) {
    json checks = json::array();
    checks.push_back(verify_sampler_vs_laplace(seed, threads));
    checks.push_back(verify_riccati(seed));
    checks.push_back(verify_semiflow(seed));
    checks.push_back(verify_zonal(seed));
    checks.push_back(verify_kalman(seed));
    *all_pass = true;
    for (const json& c : checks) {
        if (!c.at("pass").get<bool>()) *all_pass = false;
    }
    return json{{"all_pass", *all_pass}, {"checks", std::move(checks)}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distribution and process toolkit on the psd cone"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "JSON config file")
        ->expected(1);
    app.add_option("--out-dir", opts.out_dir, "directory for CSV artifacts");
    std::uint64_t seed_flag = 0;
    auto* seed_opt = app.add_option("--seed", seed_flag, "seed override");
    int threads_flag = 0;
    auto* threads_opt =
        app.add_option("--threads", threads_flag, "worker thread cap");

    const char* names[] = {"validate", "laplace",  "density", "sample",
                           "simulate", "hitprob", "girsanov", "verify"};
    const char* descs[] = {
        "classify parameter validity",
        "transition transform (phi, psi, value)",
        "series density at a point",
        "exact sampler to CSV",
        "path simulation to CSV + summary",
        "boundary hitting statistics",
        "change-of-measure weights",
        "canned cross-check battery"};
    for (int i = 0; i < 8; ++i)
        app.add_subcommand(names[i], descs[i])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        json err{{"error",
                  {{"code", "ConfigError"}, {"message", e.what()}}}};
        std::cout << err.dump(2) << std::endl;
        return 2;
    }
    if (seed_opt->count() > 0) opts.seed = seed_flag;
    if (threads_opt->count() > 0) opts.threads = std::max(1, threads_flag);

    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const int threads = worker_threads(opts);
        json result;
        std::uint64_t seed = opts.seed.value_or(0);
        int exit_code = 0;

        if (command == "verify") {
            // Config is optional here: the battery is canned.
            seed = opts.seed.value_or(42);
            bool all_pass = false;
            result = run_verify(seed, threads, &all_pass);
            if (!all_pass) exit_code = 1;
        } else {
            const json config = load_config(opts, command.c_str());
            seed = config_seed(config, opts, 0);
            if (command == "validate") {
                result = run_validate(config);
            } else if (command == "laplace") {
                result = run_laplace(config);
            } else if (command == "density") {
                result = run_density(config);
            } else if (command == "sample") {
                result = run_sample(config, opts, seed, threads);
            } else if (command == "simulate") {
                result = run_simulate(config, opts, seed, threads);
            } else if (command == "hitprob") {
                result = run_hitprob(config, seed, threads);
            } else if (command == "girsanov") {
                result = run_girsanov(config, seed, threads);
            }
        }

        json report{{"header", header_block(command.c_str(), seed, threads)},
                    {"result", std::move(result)}};
        std::cout << report.dump(2) << std::endl;
        return exit_code;
    } catch (const wl::Error& e) {
        // what() carries a "Code: " prefix; the code field already says it.
        std::string message = e.what();
        const std::string prefix = std::string(wl::errc_name(e.code())) + ": ";
        if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
        json err{{"error",
                  {{"code", wl::errc_name(e.code())}, {"message", message}}}};
        std::cout << err.dump(2) << std::endl;
        return e.code() == wl::errc::config_error ? 2 : 1;
    } catch (const std::exception& e) {
        json err{{"error",
                  {{"code", "InternalError"}, {"message", e.what()}}}};
        std::cout << err.dump(2) << std::endl;
        return 1;
    }
}
