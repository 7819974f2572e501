#pragma once

#include "cascade/model.hpp"

namespace cascade::detail {

/// Threshold-adjacent points cancel kappa*B against the gain term, so the
/// coefficient algebra is carried in extended precision and rounded once.
using xreal = long double;

struct ExtendedCoefficients {
  xreal a, kappa, w, eta, root;  ///< inputs and sqrt(1 - eta^2)
  xreal b, c, d, c_e, c_f;
  xreal mu, beta, lambda_minus, lambda_plus;
  xreal chi_plus, chi_minus;
};

/// Validates and requires theta == 0 like compute_coefficients.
ExtendedCoefficients extended_coefficients(const LaserParams& params);

}  // namespace cascade::detail
