#include "cascade/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "cascade/analytic.hpp"
#include "cascade/errors.hpp"
#include "cascade/format.hpp"
#include "cascade/parallel.hpp"

namespace cascade {
namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

double parse_double(std::string_view text, std::string_view what) {
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || !std::isfinite(v)) {
    throw DomainError("cannot parse " + std::string(what) + " from '" + s + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? text.size() - start : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Objective in minimization form; infeasible points cost +inf.
double cost(Objective objective, const LaserParams& p) {
  const Observable o =
      objective == Objective::minimize_var_minus ? Observable::var_minus : Observable::mean_photon;
  const std::optional<double> v = evaluate_observable(o, p);
  if (!v) return kInfeasible;
  return objective == Objective::minimize_var_minus ? *v : -*v;
}

struct Probe {
  double x;
  double f;
};

// Golden-section search of f on [a, b]; `best` enters as a known point and
// leaves as the best point evaluated.
template <typename F>
std::pair<double, double> golden_section(F&& f, double a, double b, double tol, Probe& best,
                                         std::size_t& evaluations) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&](double x) {
    const double v = f(x);
    ++evaluations;
    if (v < best.f) best = {x, v};
    return v;
  };
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = eval(d);
    }
  }
  return {a, b};
}

}  // namespace

std::string_view param_name(Param p) {
  switch (p) {
    case Param::gain_a: return "A";
    case Param::kappa: return "kappa";
    case Param::omega: return "omega";
    case Param::eta: return "eta";
    case Param::theta: return "theta";
  }
  return "?";
}

Param parse_param(std::string_view name) {
  for (Param p : {Param::gain_a, Param::kappa, Param::omega, Param::eta, Param::theta}) {
    if (name == param_name(p)) return p;
  }
  throw DomainError("unknown parameter '" + std::string(name) + "'");
}

double get_param(const LaserParams& params, Param p) {
  switch (p) {
    case Param::gain_a: return params.gain_a;
    case Param::kappa: return params.kappa;
    case Param::omega: return params.omega;
    case Param::eta: return params.eta;
    case Param::theta: return params.theta;
  }
  return 0.0;
}

void set_param(LaserParams& params, Param p, double value) {
  switch (p) {
    case Param::gain_a: params.gain_a = value; break;
    case Param::kappa: params.kappa = value; break;
    case Param::omega: params.omega = value; break;
    case Param::eta: params.eta = value; break;
    case Param::theta: params.theta = value; break;
  }
}

std::string_view observable_name(Observable o) {
  switch (o) {
    case Observable::var_minus: return "var_minus";
    case Observable::var_plus: return "var_plus";
    case Observable::mean_photon: return "mean_photon";
  }
  return "?";
}

Observable parse_observable(std::string_view name) {
  for (Observable o : {Observable::var_minus, Observable::var_plus, Observable::mean_photon}) {
    if (name == observable_name(o)) return o;
  }
  throw DomainError("unknown observable '" + std::string(name) + "'");
}

std::optional<double> evaluate_observable(Observable o, const LaserParams& params) {
  const CoefficientSet k = compute_coefficients(params);
  if (!check_threshold(k).below_threshold) return std::nullopt;
  const QuadratureMoments m = steady_moments(params);
  switch (o) {
    case Observable::var_minus: return m.var_minus;
    case Observable::var_plus: return m.var_plus;
    case Observable::mean_photon: return m.mean_photon;
  }
  return std::nullopt;
}

double SweepAxis::value(std::size_t i) const {
  if (i + 1 == count) return max;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

std::string SweepAxis::to_string() const {
  return std::string(param_name(param)) + ":" + format_number(min) + ":" + format_number(max) + ":"
         + std::to_string(count);
}

SweepAxis SweepAxis::parse(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4) throw DomainError("axis must be name:min:max:count, got '" + std::string(text) + "'");
  SweepAxis axis;
  axis.param = parse_param(parts[0]);
  axis.min = parse_double(parts[1], "axis min");
  axis.max = parse_double(parts[2], "axis max");
  const double count = parse_double(parts[3], "axis count");
  if (count < 2.0 || count != std::floor(count)) throw DomainError("axis count must be an integer >= 2");
  axis.count = static_cast<std::size_t>(count);
  return axis;
}

void SweepSpec::validate() const {
  fixed.validate();
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const SweepAxis& axis = axes[i];
    if (axis.count < 2) throw DomainError("sweep axis needs at least 2 points");
    if (!std::isfinite(axis.min) || !std::isfinite(axis.max)) throw DomainError("sweep axis bounds must be finite");
    for (std::size_t j = 0; j < i; ++j) {
      if (axes[j].param == axis.param) throw DomainError("sweep axes must reference distinct parameters");
    }
    for (double v : {axis.min, axis.max}) {
      LaserParams corner = fixed;
      set_param(corner, axis.param, v);
      corner.validate();
      if (corner.theta != 0.0) throw UnsupportedPhaseError("sweeps use the closed forms and need theta = 0");
    }
  }
  if (fixed.theta != 0.0) throw UnsupportedPhaseError("sweeps use the closed forms and need theta = 0");
}

std::size_t SweepResult::masked_count() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const SweepPoint& p) { return !p.value; }));
}

std::vector<std::pair<std::string, std::string>> SweepResult::provenance() const {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("version", kVersion);
  kv.emplace_back("observable", std::string(observable_name(spec.observable)));
  for (Param p : {Param::gain_a, Param::kappa, Param::omega, Param::eta, Param::theta}) {
    kv.emplace_back(std::string(param_name(p)), format_number(get_param(spec.fixed, p)));
  }
  for (const SweepAxis& axis : spec.axes) kv.emplace_back("axis", axis.to_string());
  return kv;
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::size_t total = 1;
  for (const SweepAxis& axis : spec.axes) total *= axis.count;

  SweepResult result;
  result.spec = spec;
  result.points.resize(total);
  parallel_for(total, [&](std::size_t flat) {
    LaserParams p = spec.fixed;
    SweepPoint& point = result.points[flat];
    point.coords.resize(spec.axes.size());
    std::size_t rest = flat;
    for (std::size_t k = spec.axes.size(); k-- > 0;) {
      const SweepAxis& axis = spec.axes[k];
      const double v = axis.value(rest % axis.count);
      rest /= axis.count;
      point.coords[k] = v;
      set_param(p, axis.param, v);
    }
    point.value = evaluate_observable(spec.observable, p);
  });
  return result;
}

void write_sweep_csv(std::ostream& os, const SweepResult& result,
                     std::span<const std::pair<std::string, std::string>> extra_header) {
  for (const auto& [k, v] : extra_header) os << "# " << k << '=' << v << '\n';
  for (const auto& [k, v] : result.provenance()) os << "# " << k << '=' << v << '\n';
  for (const SweepAxis& axis : result.spec.axes) os << param_name(axis.param) << ',';
  os << observable_name(result.spec.observable) << '\n';
  for (const SweepPoint& point : result.points) {
    for (double c : point.coords) os << format_number(c) << ',';
    if (point.value) {
      os << format_number(*point.value);
    } else {
      os << kAboveThreshold;
    }
    os << '\n';
  }
}

std::string_view objective_name(Objective o) {
  return o == Objective::minimize_var_minus ? "min_var_minus" : "max_mean_photon";
}

Objective parse_objective(std::string_view name) {
  if (name == "min_var_minus") return Objective::minimize_var_minus;
  if (name == "max_mean_photon") return Objective::maximize_mean_photon;
  throw DomainError("unknown objective '" + std::string(name) + "'");
}

OptimumResult find_optimum(Objective objective, const LaserParams& fixed,
                           std::span<const SearchAxis> axes, const OptimizeOptions& options) {
  if (axes.empty()) throw DomainError("find_optimum needs at least one search axis");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (!(axes[i].hi > axes[i].lo)) throw DomainError("search axis needs lo < hi");
    for (std::size_t j = 0; j < i; ++j) {
      if (axes[i].param == axes[j].param) throw DomainError("search axes must be distinct");
    }
  }
  const std::size_t per_axis = axes.size() == 1 ? options.grid_points : 41;
  if (per_axis < 3) throw DomainError("optimizer grid needs at least 3 points per axis");

  std::vector<SweepAxis> grid_axes;
  for (const SearchAxis& a : axes) grid_axes.push_back({a.param, a.lo, a.hi, per_axis});
  SweepSpec spec{grid_axes, fixed, Observable::var_minus, {}};
  spec.validate();

  OptimumResult out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < axes.size(); ++k) total *= per_axis;
  std::vector<double> grid_cost(total);
  parallel_for(total, [&](std::size_t flat) {
    LaserParams p = fixed;
    std::size_t rest = flat;
    for (std::size_t k = axes.size(); k-- > 0;) {
      set_param(p, axes[k].param, grid_axes[k].value(rest % per_axis));
      rest /= per_axis;
    }
    grid_cost[flat] = cost(objective, p);
  });
  out.evaluations = total;

  const auto best_it = std::min_element(grid_cost.begin(), grid_cost.end());
  if (!std::isfinite(*best_it)) throw DomainError("find_optimum: no below-threshold point in the search box");
  LaserParams current = fixed;
  {
    std::size_t rest = static_cast<std::size_t>(best_it - grid_cost.begin());
    for (std::size_t k = axes.size(); k-- > 0;) {
      set_param(current, axes[k].param, grid_axes[k].value(rest % per_axis));
      rest /= per_axis;
    }
  }
  double current_cost = *best_it;
  out.grid_value = objective == Objective::minimize_var_minus ? current_cost : -current_cost;

  std::vector<double> half_width(axes.size());
  for (std::size_t k = 0; k < axes.size(); ++k) {
    half_width[k] = (axes[k].hi - axes[k].lo) / static_cast<double>(per_axis - 1);
  }
  out.bracket.assign(axes.size(), {0.0, 0.0});

  const int rounds = axes.size() == 1 ? 1 : options.max_rounds;
  for (int round = 0; round < rounds; ++round) {
    const double before = current_cost;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const double x0 = get_param(current, axes[k].param);
      const double a = std::max(axes[k].lo, x0 - half_width[k]);
      const double b = std::min(axes[k].hi, x0 + half_width[k]);
      Probe best{x0, current_cost};
      auto line = [&](double x) {
        LaserParams p = current;
        set_param(p, axes[k].param, x);
        return cost(objective, p);
      };
      out.bracket[k] = golden_section(line, a, b, options.tolerance, best, out.evaluations);
      set_param(current, axes[k].param, best.x);
      current_cost = best.f;
      if (axes.size() > 1) half_width[k] = std::max(options.tolerance, 0.5 * half_width[k]);
    }
    if (round > 0 && before - current_cost <= 1e-14 * std::max(1.0, std::abs(current_cost))) break;
  }

  out.params = current;
  out.value = objective == Objective::minimize_var_minus ? current_cost : -current_cost;
  return out;
}

}  // namespace cascade
