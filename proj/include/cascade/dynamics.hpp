#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cascade/model.hpp"
#include "cascade/parallel.hpp"

namespace cascade {

/// First and second normal-ordered c-number moments at time t.
struct MomentState {
  std::complex<double> mean_alpha{};  ///< <alpha>
  std::complex<double> alpha_sq{};    ///< <alpha^2>
  double occupancy = 0.0;             ///< <alpha* alpha>
  double t = 0.0;

  /// <(alpha* + alpha)^2>
  double alpha_sq_plus() const { return 2.0 * alpha_sq.real() + 2.0 * occupancy; }
  /// <(alpha* - alpha)^2>
  double alpha_sq_minus() const { return 2.0 * alpha_sq.real() - 2.0 * occupancy; }
};

/// Constant coefficients of the linear moment equations
///   d<alpha>/dt     = -mu/2 <alpha> + beta <alpha*>
///   d<alpha^2>/dt   = -mu <alpha^2> + 2 beta <alpha* alpha> + pair_source
///   d<alpha*alpha>/dt = -mu <alpha* alpha> + beta (<alpha*^2> + <alpha^2>) + occupancy_source
struct MomentRates {
  double mu = 0.0;
  double beta = 0.0;
  double pair_source = 0.0;       ///< -A c_f / B
  double occupancy_source = 0.0;  ///< A C / B

  static MomentRates from(const CoefficientSet& coeffs);
};

/// Fixed-step RK4 integration from vacuum. The returned series holds the
/// initial state, every `stride`-th step (stride 0: none) and the final state.
/// Throws StepSizeError when step > 1 / max(|lambda_-|, |lambda_+|).
std::vector<MomentState> integrate_moments(const LaserParams& params, double t_final, double step,
                                           std::size_t stride = 0);

/// Same integrator for explicit rates and initial state.
std::vector<MomentState> integrate_moments(const MomentRates& rates, const MomentState& initial,
                                           double t_final, double step, std::size_t stride = 0);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct ComplexEstimate {
  std::complex<double> mean{};
  double std_error = 0.0;
};

/// Ensemble averages of the quadrature processes at t_final.
struct EnsembleStats {
  std::size_t n_traj = 0;
  std::uint64_t seed = 0;
  double t_final = 0.0;
  double step = 0.0;
  Estimate alpha_sq_plus;
  Estimate alpha_sq_minus;
  ComplexEstimate mean_alpha_plus;
  ComplexEstimate mean_alpha_minus;
  std::complex<double> noise_plus{};   ///< amplitude s_+, purely imaginary when s_+^2 < 0
  std::complex<double> noise_minus{};
};

/// Squared noise amplitudes s_+-^2 = -2A(c_f -+ C)/B of the two quadratures.
struct NoiseStrengths {
  double plus = 0.0;
  double minus = 0.0;
};
NoiseStrengths noise_strengths(const CoefficientSet& coeffs);

/// Trajectories per independently seeded block.
inline constexpr std::size_t kTrajectoryBlock = 256;

/// Euler-Maruyama ensemble of the decoupled quadrature equations
///   d alpha_+- = -(lambda_-+/2) alpha_+- dt + s_+- dW_+-
/// from vacuum. Each path is written alpha = s X with X a real
/// unit-noise process, so a negative s^2 gives an imaginary trajectory.
/// Output depends only on the arguments, not on `workers`.
EnsembleStats sample_trajectories(const LaserParams& params, std::size_t n_traj, double t_final,
                                  double step, std::uint64_t seed,
                                  unsigned workers = worker_count());

struct DecayEnvelopes {
  double a_plus = 1.0;
  double a_minus = 0.0;
};

/// a_+-(t) = (exp(-lambda_- t/2) +- exp(-lambda_+ t/2)) / 2.
DecayEnvelopes decay_envelopes(const CoefficientSet& coeffs, double t);

}  // namespace cascade
