#include "wishartlab/json_io.hpp"

#include <cmath>
#include <string>

namespace wishartlab {

json to_json(const Matrix& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        raise(errc::config_error, "matrix must be a non-empty array of rows");
    const auto n_rows = j.size();
    if (!j[0].is_array() || j[0].empty())
        raise(errc::config_error, "matrix rows must be non-empty arrays");
    const auto n_cols = j[0].size();
    Matrix a(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    for (std::size_t i = 0; i < n_rows; ++i) {
        if (!j[i].is_array() || j[i].size() != n_cols)
            raise(errc::config_error, "matrix rows have inconsistent lengths");
        for (std::size_t k = 0; k < n_cols; ++k) {
            if (!j[i][k].is_number())
                raise(errc::config_error, "matrix entries must be numbers");
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                j[i][k].get<double>();
        }
    }
    return a;
}

SymMatrix sym_from_json(const json& j) { return SymMatrix::from(matrix_from_json(j)); }

PsdMatrix psd_from_json(const json& j) { return PsdMatrix::validated(matrix_from_json(j)); }

json to_json(const WishartParams& params) {
    return json{{"p", params.p},
                {"omega", to_json(params.omega.mat())},
                {"sigma", to_json(params.sigma.mat())}};
}

WishartParams wishart_params_from_json(const json& j) {
    const json& p = require_field(j, "p");
    if (!p.is_number()) raise(errc::config_error, "field 'p' must be a number");
    return WishartParams::make(p.get<double>(),
                               psd_from_json(require_field(j, "omega")),
                               psd_from_json(require_field(j, "sigma")));
}

json to_json(const ProcessParams& process) {
    return json{{"p", process.p},
                {"beta", to_json(process.beta)},
                {"q", to_json(process.q)}};
}

ProcessParams process_params_from_json(const json& j) {
    const json& p = require_field(j, "p");
    if (!p.is_number()) raise(errc::config_error, "field 'p' must be a number");
    return ProcessParams::make(p.get<double>(),
                               matrix_from_json(require_field(j, "beta")),
                               matrix_from_json(require_field(j, "q")));
}

json to_json(const Verdict& verdict) {
    return json{{"status", validity_name(verdict.status)},
                {"rule_id", verdict.rule_id},
                {"reason", verdict.reason}};
}

json to_json(const DensityResult& result) {
    json tail;
    if (std::isfinite(result.tail_estimate)) tail = result.tail_estimate;
    // +inf marks an unreliable tail; JSON has no infinity so it becomes null.
    return json{{"value", result.value},
                {"terms_used", result.terms_used},
                {"tail_estimate", tail}};
}

json to_json(const McEstimate& estimate) {
    return json{{"mean", estimate.mean}, {"se", estimate.se}};
}

const json& require_field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        raise(errc::config_error, std::string("missing required field '") + key + "'");
    return j.at(key);
}

}  // namespace wishartlab
