#pragma once

#include "cascade/model.hpp"

namespace cascade {

/// Normal-ordered quadrature moments <alpha_+^2>, <alpha_-^2> with
/// alpha_+- = alpha* +- alpha, and the observables built from them.
struct QuadratureMoments {
  double alpha_sq_plus = 0.0;
  double alpha_sq_minus = 0.0;
  double var_plus = 1.0;    ///< 1 + <alpha_+^2>
  double var_minus = 1.0;   ///< 1 - <alpha_-^2>
  double mean_photon = 0.0; ///< (<alpha_+^2> - <alpha_-^2>) / 4

  /// Builds the struct so that the derived fields hold exactly.
  static QuadratureMoments from_second_moments(double alpha_sq_plus, double alpha_sq_minus);
};

enum class Quadrature { plus, minus };

/// Steady state from the coefficient-level form
///   <alpha_+-^2> = -(2A / (B lambda_-+)) (c_f -+ C).
/// Throws ThresholdError unless both lambdas are positive.
QuadratureMoments steady_moments(const LaserParams& params);

/// Same steady state written directly in (A, kappa, omega, eta) with the
/// chi denominators. Used to cross-check the coefficient route.
QuadratureMoments steady_moments_closed_form(const LaserParams& params);

/// Steady mean photon number from its four-term closed form.
double steady_mean_photon_closed_form(const LaserParams& params);

/// Steady variance of a single quadrature. The two quadratures decouple, so
/// this only needs the decay rate governing that quadrature (lambda_- for the
/// plus quadrature, lambda_+ for the minus one) to be positive.
double steady_variance(const LaserParams& params, Quadrature which);

struct TransientMoments {
  QuadratureMoments moments;
  bool convergent = true;  ///< false when no steady state exists
};

/// Moments at time t for a cavity starting in vacuum:
///   <alpha_+-^2>(t) = <alpha_+-^2>_ss (1 - exp(-lambda_-+ t)).
/// Evaluated above threshold as well; the result is then flagged.
TransientMoments transient_moments(const LaserParams& params, double t);

struct VariancePair {
  double plus = 1.0;
  double minus = 1.0;
};

/// Omega = 0: (kappa + A(1 +- sqrt(1 - eta^2))) / (A eta + kappa).
VariancePair variance_undriven(double gain_a, double kappa, double eta);

/// eta = 1, all atoms injected in the bottom level.
VariancePair variance_ground(double gain_a, double kappa, double omega);

/// eta = 0, equal top/bottom populations with maximal coherence.
VariancePair variance_balanced(double gain_a, double kappa, double omega);

double mean_photon_undriven(double gain_a, double kappa, double eta);
double mean_photon_ground(double gain_a, double kappa, double omega);
double mean_photon_balanced(double gain_a, double kappa, double omega);

enum class SpecialCase { undriven, ground, balanced };

/// Dispatches to the mean_photon_* reductions. `free_param` is eta for the
/// undriven case and omega otherwise.
double mean_photon_special(SpecialCase which, double gain_a, double kappa, double free_param);

}  // namespace cascade
