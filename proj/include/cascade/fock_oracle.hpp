#pragma once

#include <complex>
#include <iosfwd>
#include <span>

#include <Eigen/Dense>

#include "cascade/analytic.hpp"
#include "cascade/model.hpp"

namespace cascade {

/// Cavity density matrix on Fock levels 0..n_max.
struct TruncatedDensityMatrix {
  int n_max = 0;
  Eigen::MatrixXcd rho;
  double t = 0.0;

  static TruncatedDensityMatrix vacuum(int n_max);
  /// Diagonal state with the given level populations (n_max = size - 1).
  static TruncatedDensityMatrix diagonal(std::span<const double> populations);

  int dim() const { return n_max + 1; }
  double trace() const;
  /// Sum of rho_nn over the top `width` retained levels.
  double tail_population(int width = 3) const;
  double hermiticity_error() const;
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;
  /// Copy embedded into a larger truncation (new levels empty).
  TruncatedDensityMatrix padded(int new_n_max) const;
};

/// Prefactors of the four Lindblad-type brackets of the cavity master
/// equation: gain = AC/2B, loss = (AD/B + kappa)/2, pair_e = A c_e/2B,
/// pair_f = A c_f/2B. Complex only for theta != 0.
struct MasterEquationRates {
  std::complex<double> gain{};
  std::complex<double> loss{};
  std::complex<double> pair_e{};
  std::complex<double> pair_f{};
};

/// Rates for any theta. The complex coherence is inserted into the
/// coefficient formulas as is (experimental for theta != 0).
MasterEquationRates master_equation_rates(const LaserParams& params);

/// Decay of the mean field d<a>/dt = p <a> + q <a>*. Below threshold iff
/// slowest_rate > 0; second moments relax at twice these rates.
struct MeanFieldStability {
  bool stable = false;
  double slowest_rate = 0.0;
  double fastest_rate = 0.0;
};
MeanFieldStability mean_field_stability(const MasterEquationRates& rates);

/// d rho / dt. Throws DomainError if rho is not (n_max+1) x (n_max+1).
Eigen::MatrixXcd apply_liouvillian(const MasterEquationRates& rates,
                                   const TruncatedDensityMatrix& rho);

/// Largest RK4 step that keeps the truncated generator inside the
/// stability region (Gershgorin estimate).
double max_stable_step(const MasterEquationRates& rates, int n_max);

/// Field expectation values of a truncated state.
struct FieldObservables {
  double photon_number = 0.0;        ///< Tr(a^dag a rho)
  std::complex<double> mean_field{}; ///< <a>
  std::complex<double> pair{};       ///< <a^2>
  double var_plus = 1.0;             ///< variance of a^dag + a
  double var_minus = 1.0;            ///< variance of i(a^dag - a)

  /// Normal-ordered quadrature moments; mean_photon then counts only the
  /// fluctuation part n - |<a>|^2.
  QuadratureMoments moments() const;
};
FieldObservables observables(const TruncatedDensityMatrix& state);

struct Evolution {
  TruncatedDensityMatrix state;
  double tail_population = 0.0;
  bool truncation_converged = true;
};

/// RK4 integration of the master equation over [rho0.t, rho0.t + t_final].
/// step <= 0 picks max_stable_step; a larger explicit step throws StepSizeError.
Evolution evolve(const MasterEquationRates& rates, TruncatedDensityMatrix rho0, double t_final,
                 double step = 0.0, double tail_tolerance = 1e-10);
Evolution evolve(const LaserParams& params, TruncatedDensityMatrix rho0, double t_final,
                 double step = 0.0, double tail_tolerance = 1e-10);

struct OracleOptions {
  int n_max = 0;                  ///< 0: chosen from the analytic estimate, then doubled
  double tol = 1e-10;             ///< relative change per unit time of (n, <a^2>)
  double tail_tolerance = 1e-10;  ///< bound on the population of the top three levels
  int n_max_limit = 320;
  double max_time = 0.0;          ///< 0: 80 / slowest relaxation rate
};

struct OracleResult {
  QuadratureMoments moments;
  FieldObservables field;
  int n_max = 0;
  double t = 0.0;
  double tail_population = 0.0;
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  bool converged = false;  ///< time convergence and truncation both passed
  TruncatedDensityMatrix state;
};

/// Long-time integration from vacuum until the observables stop changing.
/// Throws ThresholdError when the mean field is unstable; a run that hits
/// max_time or n_max_limit returns with converged = false.
OracleResult steady_state(const LaserParams& params, const OracleOptions& options = {});

/// Debug export: header of observables, then one "n,population" row per level.
void write_population_csv(std::ostream& os, const TruncatedDensityMatrix& state);

}  // namespace cascade
