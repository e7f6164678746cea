#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wishartlab/validity.hpp"

namespace wishartlab {

// Laplace transform det(I + sigma u)^{-p} exp(-tr(u (I + sigma u)^{-1} omega)).
// Accepts any symmetric u for which I + sqrt(sigma) u sqrt(sigma) stays
// positive definite (the natural transform domain); PSD u always qualifies.
double laplace(const WishartParams& params, const SymMatrix& u);

// First moment p sigma + omega.
SymMatrix mean(const WishartParams& params);

enum class SampleMethod { gaussian_sum, bartlett_composite };

const char* sample_method_name(SampleMethod m);

struct SampleBatch {
  std::vector<PsdMatrix> draws;
  std::uint64_t seed = 0;
  SampleMethod method = SampleMethod::gaussian_sum;
};

// Exact sampler. Method selection:
//   GaussianSum       when 2p is an integer and rank(omega) <= 2p,
//   BartlettComposite when p - rank(omega)/2 > (d-1)/2
// (central Bartlett part convolved with a Gaussian-sum part carrying omega).
// Classification must come back Valid, otherwise InvalidParams; parameters
// valid by classification but fitting neither construction raise
// UnsupportedShape. `force` overrides the selection for cross-checks.
SampleBatch sample(const WishartParams& params, std::size_t n,
                   std::uint64_t seed,
                   std::optional<SampleMethod> force = std::nullopt,
                   int threads = 1);

// Image of the law under xi -> q xi q for psd q; requires sigma == I.
WishartParams pushforward_scale(const WishartParams& params, const PsdMatrix& q);

// Exponential tilt moving scale I to an invertible sigma_new.
WishartParams tilt_to_scale(const WishartParams& params,
                            const PsdMatrix& sigma_new);

// Convolution of two laws sharing the same scale (ScaleMismatch otherwise).
WishartParams convolve(const WishartParams& a, const WishartParams& b,
                       double tol = 1e-12);

}  // namespace wishartlab
