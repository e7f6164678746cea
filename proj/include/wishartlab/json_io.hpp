#pragma once

#include <json.hpp>

#include "wishartlab/density.hpp"
#include "wishartlab/sde_sim.hpp"
#include "wishartlab/validity.hpp"
#include "wishartlab/wishart_dist.hpp"

namespace wishartlab {

using nlohmann::json;

// Matrices travel as row-major nested arrays. Reads validate rectangular
// shape and finite entries; symmetric readers additionally check asymmetry
// within 1e-12 (relative) and then symmetrize exactly.
json to_json(const Matrix& a);
Matrix matrix_from_json(const json& j);
SymMatrix sym_from_json(const json& j);
PsdMatrix psd_from_json(const json& j);

json to_json(const WishartParams& params);
WishartParams wishart_params_from_json(const json& j);

json to_json(const ProcessParams& process);
ProcessParams process_params_from_json(const json& j);

json to_json(const Verdict& verdict);
json to_json(const DensityResult& result);
json to_json(const McEstimate& estimate);

// Required-field accessor that reports ConfigError with the field name.
const json& require_field(const json& j, const char* key);

}  // namespace wishartlab
