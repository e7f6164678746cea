#pragma once

#include <stdexcept>
#include <string>

namespace wishartlab {

// Stable error codes surfaced through the CLI as machine-readable strings.
enum class errc {
  not_psd,
  non_finite,
  shape_error,
  quadrature_divergence,
  singular_resolvent,
  invalid_params,
  unsupported_shape,
  not_invertible,
  scale_mismatch,
  pole_error,
  weight_overflow,
  hypothesis_violation,
  no_density,
  grid_error,
  singular_state,
  precondition_violation,
  empty_batch,
  config_error,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw Error(code, message);
}

inline const char* errc_name(errc code) {
  switch (code) {
    case errc::not_psd: return "NotPsd";
    case errc::non_finite: return "NonFinite";
    case errc::shape_error: return "ShapeError";
    case errc::quadrature_divergence: return "QuadratureDivergence";
    case errc::singular_resolvent: return "SingularResolvent";
    case errc::invalid_params: return "InvalidParams";
    case errc::unsupported_shape: return "UnsupportedShape";
    case errc::not_invertible: return "NotInvertible";
    case errc::scale_mismatch: return "ScaleMismatch";
    case errc::pole_error: return "PoleError";
    case errc::weight_overflow: return "WeightOverflow";
    case errc::hypothesis_violation: return "HypothesisViolation";
    case errc::no_density: return "NoDensity";
    case errc::grid_error: return "GridError";
    case errc::singular_state: return "SingularState";
    case errc::precondition_violation: return "PreconditionViolation";
    case errc::empty_batch: return "EmptyBatch";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace wishartlab
