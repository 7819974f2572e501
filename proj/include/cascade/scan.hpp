#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cascade/model.hpp"

namespace cascade {

enum class Param { gain_a, kappa, omega, eta, theta };

/// Flag-style names: "A", "kappa", "omega", "eta", "theta".
std::string_view param_name(Param p);
Param parse_param(std::string_view name);
double get_param(const LaserParams& params, Param p);
void set_param(LaserParams& params, Param p, double value);

enum class Observable { var_minus, var_plus, mean_photon };

std::string_view observable_name(Observable o);
Observable parse_observable(std::string_view name);

/// Steady value of the observable, or nullopt above threshold.
std::optional<double> evaluate_observable(Observable o, const LaserParams& params);

/// Linearly spaced axis; `count` >= 2 points including both ends.
struct SweepAxis {
  Param param = Param::omega;
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 201;

  double value(std::size_t i) const;
  /// "name:min:max:count"
  std::string to_string() const;
  static SweepAxis parse(std::string_view text);
};

struct SweepSpec {
  std::vector<SweepAxis> axes;  ///< empty: a single point at `fixed`
  LaserParams fixed;
  Observable observable = Observable::var_minus;
  std::string output_path;

  void validate() const;
};

struct SweepPoint {
  std::vector<double> coords;
  std::optional<double> value;  ///< empty: above threshold
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepPoint> points;  ///< row-major, first axis slowest

  std::size_t masked_count() const;
  /// key=value pairs describing the run (fixed parameters, axes, observable).
  std::vector<std::pair<std::string, std::string>> provenance() const;
};

/// Evaluates the analytic observable on every grid point in parallel.
SweepResult run_sweep(const SweepSpec& spec);

inline constexpr std::string_view kAboveThreshold = "ABOVE_THRESHOLD";

/// '#' header lines (extra pairs first, then provenance), a column-name row,
/// one row per point. Masked values print as ABOVE_THRESHOLD.
void write_sweep_csv(std::ostream& os, const SweepResult& result,
                     std::span<const std::pair<std::string, std::string>> extra_header = {});

enum class Objective { minimize_var_minus, maximize_mean_photon };

std::string_view objective_name(Objective o);
Objective parse_objective(std::string_view name);

struct SearchAxis {
  Param param = Param::omega;
  double lo = 0.0;
  double hi = 1.0;
};

struct OptimizeOptions {
  std::size_t grid_points = 201;  ///< per axis for one axis; 41 per axis otherwise
  double tolerance = 1e-4;        ///< final bracket width, parameter units
  int max_rounds = 30;            ///< coordinate sweeps for several axes
};

struct OptimumResult {
  LaserParams params;
  double value = 0.0;  ///< var_minus, or mean_photon when maximizing
  /// Final golden-section bracket per search axis.
  std::vector<std::pair<double, double>> bracket;
  /// Best objective value found on the coarse grid.
  double grid_value = 0.0;
  std::size_t evaluations = 0;
};

/// Coarse grid scan over the box, then golden-section refinement per axis.
/// Above-threshold points are infeasible. Throws DomainError when no grid
/// point is feasible.
OptimumResult find_optimum(Objective objective, const LaserParams& fixed,
                           std::span<const SearchAxis> axes, const OptimizeOptions& options = {});

}  // namespace cascade
