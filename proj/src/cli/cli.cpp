#include "cascade/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cascade/analytic.hpp"
#include "cascade/dynamics.hpp"
#include "cascade/errors.hpp"
#include "cascade/fock_oracle.hpp"
#include "cascade/format.hpp"
#include "cascade/model.hpp"
#include "cascade/scan.hpp"

namespace cascade::cli {
namespace {

// Everything a subcommand may read. Flags not registered on a subcommand
// keep their defaults.
struct Settings {
  LaserParams params;
  std::optional<double> at_time;
  double step = 0.0;
  double t_final = 0.0;
  std::size_t n_traj = 10000;
  std::uint64_t seed = 1;
  std::size_t stride = 0;
  int n_max = 0;
  double tol = 1e-10;
  double tail_tol = 1e-10;
  std::vector<std::string> axes;
  std::string observable = "var_minus";
  std::string objective = "min_var_minus";
  std::vector<std::string> search;
  std::size_t grid_points = 201;
  double opt_tol = 1e-4;
  std::string format = "csv";
  std::string output;
  std::string series;
  std::string populations;
  std::string config;
};

// A registered flag and the text to echo when the user did not set it
// (empty: omit from provenance).
struct Flag {
  std::string name;
  CLI::Option* option;
  std::string default_text;
};

class Command {
public:
  Command(CLI::App& app, std::string name, std::string description)
      : sub_(app.add_subcommand(name, description)), name_(std::move(name)) {}

  template <typename T>
  Command& flag(const std::string& name, T& target, const std::string& help,
                std::string default_text) {
    flags_.push_back({name, sub_->add_option("--" + name, target, help), std::move(default_text)});
    return *this;
  }

  Command& laser_flags(Settings& s) {
    flag("A", s.params.gain_a, "linear gain coefficient A", "0");
    flag("kappa", s.params.kappa, "cavity damping constant (units of gamma)", "0.2");
    flag("omega", s.params.omega, "drive ratio Omega/gamma", "0");
    flag("eta", s.params.eta, "population parameter eta in [-1, 1]", "0");
    flag("theta", s.params.theta, "phase of the injected coherence", "0");
    return *this;
  }

  Command& output_flags(Settings& s) {
    flag("format", s.format, "csv or json", "csv")
        .flags_.back().option->check(CLI::IsMember({"csv", "json"}));
    sub_->add_option("--output", s.output, "output file (relative paths resolve under $" +
                                               std::string(kOutputDirEnv) + ")");
    sub_->add_option("--config", s.config, "key=value file; explicit flags take precedence");
    return *this;
  }

  CLI::App* app() const { return sub_; }
  const std::string& name() const { return name_; }

  KeyValues provenance() const {
    KeyValues kv{{"schema", kSchema}, {"version", kVersion}, {"command", name_}};
    for (const Flag& f : flags_) {
      if (f.option->count() > 0) {
        for (const std::string& r : f.option->results()) kv.emplace_back(f.name, r);
      } else if (!f.default_text.empty()) {
        kv.emplace_back(f.name, f.default_text);
      }
    }
    return kv;
  }

private:
  CLI::App* sub_;
  std::string name_;
  std::vector<Flag> flags_;
};

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::filesystem::path resolve_output(const std::string& output) {
  std::filesystem::path p(output);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
      return std::filesystem::path(dir) / p;
    }
  }
  return p;
}

void emit(const Table& table, const Settings& s, std::ostream& out) {
  auto render = [&](std::ostream& os) {
    if (s.format == "json") {
      table.render_json(os);
    } else {
      table.render_csv(os);
    }
  };
  if (s.output.empty()) {
    render(out);
    return;
  }
  const std::filesystem::path path = resolve_output(s.output);
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open output file " + path.string());
  render(file);
}

std::ofstream open_side_file(const std::string& name) {
  const std::filesystem::path path = resolve_output(name);
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open output file " + path.string());
  return file;
}

// --- subcommands -----------------------------------------------------------

Table cmd_coefficients(const Settings& s) {
  const CoefficientSet k = compute_coefficients(s.params);
  const StabilityReport r = check_threshold(k);
  Table t;
  t.columns = {"quantity", "value"};
  t.rows = {{std::string("B"), k.b},
            {std::string("C"), k.c},
            {std::string("D"), k.d},
            {std::string("c_e"), k.c_e},
            {std::string("c_f"), k.c_f},
            {std::string("mu"), k.mu},
            {std::string("beta"), k.beta},
            {std::string("lambda_minus"), k.lambda_minus},
            {std::string("lambda_plus"), k.lambda_plus},
            {std::string("chi_plus"), k.chi_plus},
            {std::string("chi_minus"), k.chi_minus},
            {std::string("margin"), r.margin},
            {std::string("below_threshold"), bool_text(r.below_threshold)}};
  const std::optional<double> a_max = gain_threshold(s.params.kappa, s.params.omega, s.params.eta);
  t.rows.push_back({std::string("gain_threshold"), a_max ? Cell(*a_max) : Cell(std::string("none"))});
  return t;
}

Table cmd_moments(const Settings& s, bool photon_only) {
  Table t;
  if (s.at_time) {
    const TransientMoments tm = transient_moments(s.params, *s.at_time);
    const QuadratureMoments& m = tm.moments;
    if (photon_only) {
      t.columns = {"t", "mean_photon", "convergent"};
      t.rows.push_back({*s.at_time, m.mean_photon, bool_text(tm.convergent)});
    } else {
      t.columns = {"t", "alpha_sq_plus", "alpha_sq_minus", "var_plus", "var_minus", "mean_photon",
                   "convergent"};
      t.rows.push_back({*s.at_time, m.alpha_sq_plus, m.alpha_sq_minus, m.var_plus, m.var_minus,
                        m.mean_photon, bool_text(tm.convergent)});
    }
    return t;
  }
  const QuadratureMoments m = steady_moments(s.params);
  if (photon_only) {
    t.columns = {"mean_photon"};
    t.rows.push_back({m.mean_photon});
  } else {
    t.columns = {"alpha_sq_plus", "alpha_sq_minus", "var_plus", "var_minus", "mean_photon",
                 "percent_squeezing"};
    t.rows.push_back({m.alpha_sq_plus, m.alpha_sq_minus, m.var_plus, m.var_minus, m.mean_photon,
                      percent_squeezing(m.var_minus)});
  }
  return t;
}

Table cmd_simulate(const Settings& s) {
  const CoefficientSet k = compute_coefficients(s.params);
  const StabilityReport r = check_threshold(k);
  if (!r.below_threshold) {
    throw ThresholdError("simulate: parameters are above threshold", k.lambda_minus, k.lambda_plus);
  }
  const double t_final = s.t_final > 0.0 ? s.t_final : 30.0 / k.lambda_minus;
  const double fastest = std::max({std::abs(k.lambda_minus), std::abs(k.lambda_plus), k.mu, 1.0});
  const double step = s.step > 0.0 ? s.step : 0.01 / fastest;

  const auto series = integrate_moments(s.params, t_final, step, s.stride);
  if (!s.series.empty()) {
    std::ofstream file = open_side_file(s.series);
    file << "t,re_mean_alpha,im_mean_alpha,re_alpha_sq,im_alpha_sq,occupancy\n";
    for (const MomentState& m : series) {
      file << format_number(m.t) << ',' << format_number(m.mean_alpha.real()) << ','
           << format_number(m.mean_alpha.imag()) << ',' << format_number(m.alpha_sq.real()) << ','
           << format_number(m.alpha_sq.imag()) << ',' << format_number(m.occupancy) << '\n';
    }
  }
  const MomentState& last = series.back();
  const QuadratureMoments exact = transient_moments(s.params, t_final).moments;
  const EnsembleStats e = sample_trajectories(s.params, s.n_traj, t_final, step, s.seed);

  auto z = [](double value, double reference, double error) {
    return error > 0.0 ? (value - reference) / error : 0.0;
  };
  // Mean of alpha_+- projected on the direction of its noise amplitude.
  auto projected = [](const ComplexEstimate& m, std::complex<double> noise) {
    const double scale = std::abs(noise);
    return scale > 0.0 ? (m.mean * std::conj(noise)).real() / scale : 0.0;
  };
  const double mean_plus = projected(e.mean_alpha_plus, e.noise_plus);
  const double mean_minus = projected(e.mean_alpha_minus, e.noise_minus);

  Table t;
  t.columns = {"quantity", "analytic", "ode", "ensemble", "std_error", "z_score"};
  t.rows.push_back({std::string("alpha_sq_plus"), exact.alpha_sq_plus, last.alpha_sq_plus(),
                    e.alpha_sq_plus.mean, e.alpha_sq_plus.std_error,
                    z(e.alpha_sq_plus.mean, exact.alpha_sq_plus, e.alpha_sq_plus.std_error)});
  t.rows.push_back({std::string("alpha_sq_minus"), exact.alpha_sq_minus, last.alpha_sq_minus(),
                    e.alpha_sq_minus.mean, e.alpha_sq_minus.std_error,
                    z(e.alpha_sq_minus.mean, exact.alpha_sq_minus, e.alpha_sq_minus.std_error)});
  t.rows.push_back({std::string("mean_alpha_plus"), 0.0, 2.0 * last.mean_alpha.real(), mean_plus,
                    e.mean_alpha_plus.std_error, z(mean_plus, 0.0, e.mean_alpha_plus.std_error)});
  t.rows.push_back({std::string("mean_alpha_minus"), 0.0, 2.0 * last.mean_alpha.imag(), mean_minus,
                    e.mean_alpha_minus.std_error, z(mean_minus, 0.0, e.mean_alpha_minus.std_error)});
  t.provenance.emplace_back("resolved_t_final", format_number(t_final));
  t.provenance.emplace_back("resolved_step", format_number(e.step));
  return t;
}

struct OracleOutcome {
  Table table;
  bool converged;
};

OracleOutcome cmd_oracle(const Settings& s) {
  OracleOptions options;
  options.n_max = s.n_max;
  options.tol = s.tol;
  options.tail_tolerance = s.tail_tol;
  const OracleResult r = steady_state(s.params, options);

  std::optional<QuadratureMoments> reference;
  if (s.params.theta == 0.0) {
    try {
      reference = steady_moments(s.params);
    } catch (const ThresholdError&) {
    }
  }
  const std::string na = "NA";
  auto compare = [&](const std::string& name, double value, std::optional<double> ref) {
    if (!ref) return std::vector<Cell>{name, value, na, na};
    return std::vector<Cell>{name, value, *ref, value - *ref};
  };
  Table t;
  t.columns = {"quantity", "oracle", "analytic", "delta"};
  t.rows.push_back(compare("mean_photon", r.field.photon_number,
                           reference ? std::optional(reference->mean_photon) : std::nullopt));
  t.rows.push_back(compare("var_plus", r.field.var_plus,
                           reference ? std::optional(reference->var_plus) : std::nullopt));
  t.rows.push_back(compare("var_minus", r.field.var_minus,
                           reference ? std::optional(reference->var_minus) : std::nullopt));
  t.rows.push_back({std::string("n_max"), static_cast<double>(r.n_max), na, na});
  t.rows.push_back({std::string("t"), r.t, na, na});
  t.rows.push_back({std::string("tail_population"), r.tail_population, na, na});
  t.rows.push_back({std::string("trace_error"), r.trace_error, na, na});
  t.rows.push_back({std::string("hermiticity_error"), r.hermiticity_error, na, na});
  t.rows.push_back({std::string("min_eigenvalue"), r.min_eigenvalue, na, na});
  t.rows.push_back({std::string("converged"), bool_text(r.converged), na, na});

  if (!s.populations.empty()) {
    std::ofstream file = open_side_file(s.populations);
    write_population_csv(file, r.state);
  }
  return {std::move(t), r.converged};
}

Table cmd_sweep(const Settings& s) {
  SweepSpec spec;
  spec.fixed = s.params;
  spec.observable = parse_observable(s.observable);
  for (const std::string& a : s.axes) spec.axes.push_back(SweepAxis::parse(a));
  const SweepResult result = run_sweep(spec);

  Table t;
  for (const SweepAxis& axis : spec.axes) t.columns.emplace_back(param_name(axis.param));
  t.columns.emplace_back(observable_name(spec.observable));
  for (const SweepPoint& p : result.points) {
    std::vector<Cell> row(p.coords.begin(), p.coords.end());
    row.push_back(p.value ? Cell(*p.value) : Cell(std::string(cascade::kAboveThreshold)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

SearchAxis parse_search(const std::string& text) {
  const auto first = text.find(':');
  const auto second = text.find(':', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw DomainError("search axis must be name:lo:hi, got '" + text + "'");
  }
  SearchAxis axis;
  axis.param = parse_param(text.substr(0, first));
  try {
    axis.lo = std::stod(text.substr(first + 1, second - first - 1));
    axis.hi = std::stod(text.substr(second + 1));
  } catch (const std::exception&) {
    throw DomainError("cannot parse search bounds in '" + text + "'");
  }
  return axis;
}

Table cmd_optimize(const Settings& s) {
  std::vector<SearchAxis> axes;
  for (const std::string& a : s.search) axes.push_back(parse_search(a));
  OptimizeOptions options;
  options.grid_points = s.grid_points;
  options.tolerance = s.opt_tol;
  const OptimumResult r = find_optimum(parse_objective(s.objective), s.params, axes, options);
  Table t;
  t.columns = {"A", "kappa", "omega", "eta", "theta", "value", "grid_value", "evaluations"};
  t.rows.push_back({r.params.gain_a, r.params.kappa, r.params.omega, r.params.eta, r.params.theta,
                    r.value, r.grid_value, static_cast<double>(r.evaluations)});
  return t;
}

void cmd_schema(std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["schema"] = kSchema;
  doc["version"] = kVersion;
  doc["number_format"] = "12 significant digits";
  doc["masked_token"] = std::string(cascade::kAboveThreshold);
  doc["csv"] = "'# key=value' provenance lines, one header row of column names, one row per record";
  doc["json"] = "{provenance: {key: value | [values]}, columns: [...], rows: [{column: value}]}";
  doc["exit_codes"] = {{"0", "success"},
                       {"2", "input validation"},
                       {"3", "above threshold / no steady state"},
                       {"4", "unconverged oracle"}};
  nlohmann::ordered_json commands;
  commands["coefficients"] = {{"columns", {"quantity", "value"}}};
  commands["variance"] = {
      {"columns", {"alpha_sq_plus", "alpha_sq_minus", "var_plus", "var_minus", "mean_photon",
                   "percent_squeezing"}},
      {"columns_at_time", {"t", "alpha_sq_plus", "alpha_sq_minus", "var_plus", "var_minus",
                           "mean_photon", "convergent"}}};
  commands["photon"] = {{"columns", {"mean_photon"}},
                        {"columns_at_time", {"t", "mean_photon", "convergent"}}};
  commands["simulate"] = {
      {"columns", {"quantity", "analytic", "ode", "ensemble", "std_error", "z_score"}},
      {"series_columns", {"t", "re_mean_alpha", "im_mean_alpha", "re_alpha_sq", "im_alpha_sq",
                          "occupancy"}}};
  commands["oracle"] = {{"columns", {"quantity", "oracle", "analytic", "delta"}},
                        {"populations_columns", {"n", "population"}}};
  commands["sweep"] = {{"columns", "one per axis parameter, then the observable"}};
  commands["optimize"] = {
      {"columns", {"A", "kappa", "omega", "eta", "theta", "value", "grid_value", "evaluations"}}};
  doc["commands"] = commands;
  out << doc.dump(2) << '\n';
}

// Splices a config file into the argument list: file entries become flags
// placed before the explicit ones and are dropped when the flag is given.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::vector<std::string> explicit_args;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      explicit_args.push_back(args[i]);
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw DomainError("cannot read config file " + config_path);
  const KeyValues entries = parse_config(in);

  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(explicit_args.begin(), explicit_args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> out{args[0]};
  for (const auto& [key, value] : entries) {
    if (key == "command") {
      if (value != args[0]) throw DomainError("config file is for '" + value + "', not '" + args[0] + "'");
      continue;
    }
    if (key == "schema" || key == "version" || key.rfind("resolved_", 0) == 0) continue;
    if (key == "output" || key == "config" || given(key)) continue;
    out.push_back("--" + key);
    out.push_back(value);
  }
  out.insert(out.end(), explicit_args.begin(), explicit_args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Driven degenerate three-level cascade laser: coefficients, squeezing, "
               "photon number, stochastic and Fock-space checks"};
  app.name("cascade_laser");
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help) -> Command& {
    commands.push_back(std::make_unique<Command>(app, name, help));
    return *commands.back();
  };

  add("coefficients", "print the coefficient set and threshold report").laser_flags(s).output_flags(s);
  for (const char* name : {"variance", "photon"}) {
    Command& c = add(name, std::string(name) == "variance" ? "steady or transient quadrature variances"
                                                          : "steady or transient mean photon number");
    c.laser_flags(s);
    c.app()->add_option("--at-time", s.at_time, "evaluate at time t (units 1/gamma) from vacuum");
    c.output_flags(s);
  }
  add("simulate", "moment ODE and Langevin ensemble against the closed forms")
      .laser_flags(s)
      .flag("n-traj", s.n_traj, "number of trajectories", "10000")
      .flag("t-final", s.t_final, "final time, 0 = 30 / lambda_-", "0")
      .flag("step", s.step, "time step, 0 = 0.01 / max(lambda, mu, 1)", "0")
      .flag("seed", s.seed, "random seed", "1")
      .flag("stride", s.stride, "ODE series stride in steps (0 = endpoints only)", "0")
      .output_flags(s)
      .app()
      ->add_option("--series", s.series, "write the ODE time series CSV here");
  add("oracle", "truncated Fock-space master equation steady state")
      .laser_flags(s)
      .flag("n-max", s.n_max, "highest Fock level, 0 = automatic", "0")
      .flag("tol", s.tol, "relative change per unit time to stop", "1e-10")
      .flag("tail-tol", s.tail_tol, "allowed population in the top three levels", "1e-10")
      .output_flags(s)
      .app()
      ->add_option("--populations", s.populations, "write diagonal populations CSV here");
  add("sweep", "evaluate an observable on a parameter grid")
      .laser_flags(s)
      .flag("axis", s.axes, "name:min:max:count (repeatable)", "")
      .flag("observable", s.observable, "var_minus | var_plus | mean_photon", "var_minus")
      .output_flags(s);
  add("optimize", "grid scan plus golden-section refinement")
      .laser_flags(s)
      .flag("objective", s.objective, "min_var_minus | max_mean_photon", "min_var_minus")
      .flag("search", s.search, "name:lo:hi (repeatable)", "")
      .flag("grid-points", s.grid_points, "coarse grid points per axis", "201")
      .flag("opt-tol", s.opt_tol, "golden-section bracket tolerance", "0.0001")
      .output_flags(s);
  app.add_subcommand("schema", "describe the CSV/JSON output schemas");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    if (name == "schema") {
      cmd_schema(out);
      return kOk;
    }
    const Command& command = **std::find_if(commands.begin(), commands.end(),
                                            [&](const auto& c) { return c->name() == name; });
    Table table;
    int code = kOk;
    if (name == "coefficients") {
      table = cmd_coefficients(s);
    } else if (name == "variance" || name == "photon") {
      table = cmd_moments(s, name == "photon");
    } else if (name == "simulate") {
      table = cmd_simulate(s);
    } else if (name == "oracle") {
      OracleOutcome o = cmd_oracle(s);
      table = std::move(o.table);
      if (!o.converged) {
        err << "warning: oracle did not converge (time or truncation)\n";
        code = kUnconverged;
      }
    } else if (name == "sweep") {
      table = cmd_sweep(s);
    } else if (name == "optimize") {
      table = cmd_optimize(s);
    }
    KeyValues header = command.provenance();
    header.insert(header.end(), table.provenance.begin(), table.provenance.end());
    table.provenance = std::move(header);
    emit(table, s, out);
    return code;
  } catch (const ThresholdError& e) {
    err << "above threshold: " << e.what() << '\n';
    return kAboveThreshold;
  } catch (const ConvergenceError& e) {
    err << "unconverged: " << e.what() << '\n';
    return kUnconverged;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const UnsupportedPhaseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const StepSizeError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace cascade::cli
