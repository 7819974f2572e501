#pragma once

#include <complex>
#include <optional>

namespace cascade {

/// Physical knobs of the driven cascade laser. All rates are in units of the
/// atomic decay rate gamma (gamma = 1); omega is the drive ratio Omega/gamma.
struct LaserParams {
  double gain_a = 0.0;  ///< linear gain coefficient A = 2 r_a g^2 / gamma^2
  double kappa = 0.2;   ///< cavity damping constant
  double omega = 0.0;   ///< drive amplitude Omega / gamma
  double eta = 0.0;     ///< population parameter, rho_aa = (1 - eta) / 2
  double theta = 0.0;   ///< phase of the injected top/bottom coherence

  /// Throws DomainError when a field is outside its physical range.
  void validate() const;

  friend bool operator==(const LaserParams&, const LaserParams&) = default;
};

/// Density-matrix elements of the injected atom in the {|a>, |c>} subspace.
struct InitialAtomState {
  double rho_aa = 0.0;
  double rho_cc = 0.0;
  std::complex<double> rho_ac{};
};

/// Coefficients of the reduced cavity master equation at theta = 0 and the
/// rates derived from them. `c_e` and `c_f` are the anomalous (two-photon)
/// coefficients usually written E and F.
struct CoefficientSet {
  double b = 1.0;
  double c = 0.0;
  double d = 0.0;
  double c_e = 0.0;
  double c_f = 0.0;
  double mu = 0.0;            ///< drift rate (A/B)(D - C) + kappa
  double beta = 0.0;          ///< anomalous coupling (A/2B)(c_e - c_f)
  double lambda_minus = 0.0;  ///< mu - 2 beta, decay rate of the plus quadrature
  double lambda_plus = 0.0;   ///< mu + 2 beta, decay rate of the minus quadrature
  double chi_plus = 0.0;      ///< closed-form denominator, equals b * lambda_minus
  double chi_minus = 0.0;     ///< closed-form denominator, equals b * lambda_plus
  double gain_a = 0.0;        ///< copy of A, needed by every source term
};

struct StabilityReport {
  bool below_threshold = false;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double margin = 0.0;  ///< min(lambda_minus, lambda_plus)
};

/// rho_aa = (1 - eta)/2, rho_cc = (1 + eta)/2, rho_ac = sqrt(rho_aa rho_cc) e^{i theta}.
InitialAtomState derive_initial_state(double eta, double theta);

/// Closed-form coefficient algebra. Requires theta == 0 (UnsupportedPhaseError
/// otherwise); use `master_equation_rates` for a complex coherence.
CoefficientSet compute_coefficients(const LaserParams& params);

/// Below threshold iff both quadrature decay rates are positive.
StabilityReport check_threshold(const CoefficientSet& coeffs);

/// Convenience: `check_threshold(compute_coefficients(params))`.
StabilityReport check_threshold(const LaserParams& params);

/// Largest gain A for which (kappa, omega, eta) stays below threshold, i.e.
/// the smallest positive root of chi_plus or chi_minus, both linear in A.
/// Returns nullopt when the point is stable for every A >= 0.
std::optional<double> gain_threshold(double kappa, double omega, double eta);

/// Percent squeezing relative to the vacuum variance 1.
inline double percent_squeezing(double variance) { return (1.0 - variance) * 100.0; }

}  // namespace cascade
