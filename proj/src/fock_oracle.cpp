#include "cascade/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <vector>

#include "cascade/errors.hpp"

namespace cascade {
namespace {

using cd = std::complex<double>;

// sqrt(k) for k = 0..n_max+2; indices past the truncation read as zero
// through the bounds checks in the generator.
std::vector<double> sqrt_table(int n_max) {
  std::vector<double> s(static_cast<std::size_t>(n_max) + 3);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::sqrt(static_cast<double>(k));
  return s;
}

void apply_into(const MasterEquationRates& r, const Eigen::MatrixXcd& rho,
                const std::vector<double>& s, Eigen::MatrixXcd& out) {
  const int N = static_cast<int>(rho.rows()) - 1;
  const double gain_jump = 2.0 * r.gain.real();
  const double loss_jump = 2.0 * r.loss.real();
  const cd gain_c = std::conj(r.gain);
  const cd loss_c = std::conj(r.loss);
  const cd up_up = r.pair_e + r.pair_f;                         // a^dag rho a^dag
  const cd down_down = std::conj(r.pair_e) + std::conj(r.pair_f); // a rho a
  const cd e = r.pair_e;
  const cd e_c = std::conj(r.pair_e);
  const cd f = r.pair_f;
  const cd f_c = std::conj(r.pair_f);

  for (int n = 0; n <= N; ++n) {
    // a a^dag in the truncated space: (k + 1) below the top level, 0 on it.
    const double aad_n = n < N ? n + 1.0 : 0.0;
    for (int m = 0; m <= N; ++m) {
      const double aad_m = m < N ? m + 1.0 : 0.0;
      cd acc = -(r.gain * aad_m + gain_c * aad_n + r.loss * static_cast<double>(m)
                 + loss_c * static_cast<double>(n)) * rho(m, n);
      if (m > 0 && n > 0) acc += gain_jump * s[m] * s[n] * rho(m - 1, n - 1);
      if (m < N && n < N) acc += loss_jump * s[m + 1] * s[n + 1] * rho(m + 1, n + 1);
      if (m > 0 && n < N) acc += up_up * s[m] * s[n + 1] * rho(m - 1, n + 1);
      if (m < N && n > 0) acc += down_down * s[m + 1] * s[n] * rho(m + 1, n - 1);
      if (n + 2 <= N) acc -= e * s[n + 1] * s[n + 2] * rho(m, n + 2);
      if (m + 2 <= N) acc -= e_c * s[m + 1] * s[m + 2] * rho(m + 2, n);
      if (m >= 2) acc -= f * s[m] * s[m - 1] * rho(m - 2, n);
      if (n >= 2) acc -= f_c * s[n] * s[n - 1] * rho(m, n - 2);
      out(m, n) = acc;
    }
  }
}

class Rk4Integrator {
public:
  Rk4Integrator(const MasterEquationRates& rates, int n_max)
      : rates_(rates), sqrt_(sqrt_table(n_max)), k1_(n_max + 1, n_max + 1), k2_(k1_), k3_(k1_),
        k4_(k1_), tmp_(k1_) {}

  void step(Eigen::MatrixXcd& rho, double h) {
    apply_into(rates_, rho, sqrt_, k1_);
    tmp_ = rho + (0.5 * h) * k1_;
    apply_into(rates_, tmp_, sqrt_, k2_);
    tmp_ = rho + (0.5 * h) * k2_;
    apply_into(rates_, tmp_, sqrt_, k3_);
    tmp_ = rho + h * k3_;
    apply_into(rates_, tmp_, sqrt_, k4_);
    rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

  /// Derivative at the current state (reuses k1).
  const Eigen::MatrixXcd& derivative(const Eigen::MatrixXcd& rho) {
    apply_into(rates_, rho, sqrt_, k1_);
    return k1_;
  }

private:
  MasterEquationRates rates_;
  std::vector<double> sqrt_;
  Eigen::MatrixXcd k1_, k2_, k3_, k4_, tmp_;
};

double photon_number(const Eigen::MatrixXcd& rho) {
  double n = 0.0;
  for (Eigen::Index k = 0; k < rho.rows(); ++k) n += static_cast<double>(k) * rho(k, k).real();
  return n;
}

cd pair_moment(const Eigen::MatrixXcd& rho) {
  cd sum = 0.0;
  for (Eigen::Index m = 0; m + 2 < rho.rows(); ++m) {
    sum += std::sqrt(static_cast<double>((m + 1) * (m + 2))) * rho(m + 2, m);
  }
  return sum;
}

cd mean_field_moment(const Eigen::MatrixXcd& rho) {
  cd sum = 0.0;
  for (Eigen::Index m = 0; m + 1 < rho.rows(); ++m) {
    sum += std::sqrt(static_cast<double>(m + 1)) * rho(m + 1, m);
  }
  return sum;
}

int initial_n_max(const LaserParams& params, const OracleOptions& options) {
  if (options.n_max > 0) return options.n_max;
  if (params.theta == 0.0) {
    try {
      const double n = steady_moments(params).mean_photon;
      return std::max(4, static_cast<int>(std::ceil(10.0 + 8.0 * std::max(0.0, n))));
    } catch (const ThresholdError&) {
    }
  }
  return 40;
}

}  // namespace

TruncatedDensityMatrix TruncatedDensityMatrix::vacuum(int n_max) {
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  TruncatedDensityMatrix s;
  s.n_max = n_max;
  s.rho = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
  s.rho(0, 0) = 1.0;
  return s;
}

TruncatedDensityMatrix TruncatedDensityMatrix::diagonal(std::span<const double> populations) {
  if (populations.size() < 2) throw DomainError("need at least two Fock levels");
  TruncatedDensityMatrix s;
  s.n_max = static_cast<int>(populations.size()) - 1;
  s.rho = Eigen::MatrixXcd::Zero(s.dim(), s.dim());
  for (int k = 0; k <= s.n_max; ++k) s.rho(k, k) = populations[static_cast<std::size_t>(k)];
  return s;
}

double TruncatedDensityMatrix::trace() const { return rho.trace().real(); }

double TruncatedDensityMatrix::tail_population(int width) const {
  double tail = 0.0;
  for (int k = std::max(0, n_max - width + 1); k <= n_max; ++k) tail += rho(k, k).real();
  return tail;
}

double TruncatedDensityMatrix::hermiticity_error() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double TruncatedDensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

TruncatedDensityMatrix TruncatedDensityMatrix::padded(int new_n_max) const {
  if (new_n_max < n_max) throw DomainError("padded: cannot shrink the truncation");
  TruncatedDensityMatrix s;
  s.n_max = new_n_max;
  s.t = t;
  s.rho = Eigen::MatrixXcd::Zero(new_n_max + 1, new_n_max + 1);
  s.rho.topLeftCorner(dim(), dim()) = rho;
  return s;
}

MasterEquationRates master_equation_rates(const LaserParams& params) {
  params.validate();
  const InitialAtomState atom = derive_initial_state(params.eta, params.theta);
  const double w = params.omega;
  const double w2 = w * w;
  const double a = params.gain_a;
  const double b = (1.0 + w2) * (1.0 + 0.25 * w2);
  const cd rac = atom.rho_ac;
  const double raa = atom.rho_aa;
  const double rcc = atom.rho_cc;

  const cd c = raa * (1.0 + 0.25 * w2) - rac * (1.5 * w) + rcc * 0.75 * w2;
  const cd d = raa * 0.75 * w2 + rac * (1.5 * w) + rcc * (1.0 + 0.25 * w2);
  const cd e = -raa * 0.5 * w * (1.0 - 0.5 * w2) - rac * (1.0 - 0.5 * w2) + rcc * w * (1.0 + 0.25 * w2);
  const cd f = -raa * w * (1.0 + 0.25 * w2) - rac * (1.0 - 0.5 * w2) + rcc * 0.5 * w * (1.0 - 0.5 * w2);

  MasterEquationRates r;
  r.gain = a * c / (2.0 * b);
  r.loss = 0.5 * (a * d / b + params.kappa);
  r.pair_e = a * e / (2.0 * b);
  r.pair_f = a * f / (2.0 * b);
  return r;
}

MeanFieldStability mean_field_stability(const MasterEquationRates& r) {
  const cd p = std::conj(r.gain) - r.loss;
  const cd q = r.pair_e - r.pair_f;
  // Eigenvalues of [[p, q], [q*, p*]]: Re p +- sqrt(|q|^2 - (Im p)^2).
  const cd disc = std::sqrt(cd(std::norm(q) - p.imag() * p.imag(), 0.0));
  const double hi = p.real() + disc.real();
  const double lo = p.real() - disc.real();
  return {hi < 0.0, -hi, -lo};
}

Eigen::MatrixXcd apply_liouvillian(const MasterEquationRates& rates,
                                   const TruncatedDensityMatrix& state) {
  if (state.rho.rows() != state.dim() || state.rho.cols() != state.dim()) {
    std::ostringstream os;
    os << "density matrix is " << state.rho.rows() << "x" << state.rho.cols() << ", expected "
       << state.dim() << "x" << state.dim();
    throw DomainError(os.str());
  }
  Eigen::MatrixXcd out(state.dim(), state.dim());
  apply_into(rates, state.rho, sqrt_table(state.n_max), out);
  return out;
}

double max_stable_step(const MasterEquationRates& r, int n_max) {
  const std::vector<double> s = sqrt_table(n_max);
  const int N = n_max;
  const double up_up = std::abs(r.pair_e + r.pair_f);
  const double down_down = std::abs(std::conj(r.pair_e) + std::conj(r.pair_f));
  double bound = 0.0;
  for (int n = 0; n <= N; ++n) {
    const double aad_n = n < N ? n + 1.0 : 0.0;
    for (int m = 0; m <= N; ++m) {
      const double aad_m = m < N ? m + 1.0 : 0.0;
      double row = std::abs(r.gain * aad_m + std::conj(r.gain) * aad_n + r.loss * double(m)
                            + std::conj(r.loss) * double(n));
      if (m > 0 && n > 0) row += 2.0 * std::abs(r.gain.real()) * s[m] * s[n];
      if (m < N && n < N) row += 2.0 * std::abs(r.loss.real()) * s[m + 1] * s[n + 1];
      if (m > 0 && n < N) row += up_up * s[m] * s[n + 1];
      if (m < N && n > 0) row += down_down * s[m + 1] * s[n];
      if (n + 2 <= N) row += std::abs(r.pair_e) * s[n + 1] * s[n + 2];
      if (m + 2 <= N) row += std::abs(r.pair_e) * s[m + 1] * s[m + 2];
      if (m >= 2) row += std::abs(r.pair_f) * s[m] * s[m - 1];
      if (n >= 2) row += std::abs(r.pair_f) * s[n] * s[n - 1];
      bound = std::max(bound, row);
    }
  }
  return bound > 0.0 ? 2.5 / bound : 1.0;
}

QuadratureMoments FieldObservables::moments() const {
  return QuadratureMoments::from_second_moments(var_plus - 1.0, 1.0 - var_minus);
}

FieldObservables observables(const TruncatedDensityMatrix& state) {
  FieldObservables o;
  o.photon_number = photon_number(state.rho);
  o.mean_field = mean_field_moment(state.rho);
  o.pair = pair_moment(state.rho);
  const double re = o.mean_field.real();
  const double im = o.mean_field.imag();
  o.var_plus = 1.0 + 2.0 * o.photon_number + 2.0 * o.pair.real() - 4.0 * re * re;
  o.var_minus = 1.0 + 2.0 * o.photon_number - 2.0 * o.pair.real() - 4.0 * im * im;
  return o;
}

Evolution evolve(const MasterEquationRates& rates, TruncatedDensityMatrix rho0, double t_final,
                 double step, double tail_tolerance) {
  if (!std::isfinite(t_final) || t_final < 0.0) throw DomainError("t_final must be >= 0");
  if (rho0.rho.rows() != rho0.dim() || rho0.rho.cols() != rho0.dim()) {
    throw DomainError("density matrix dimension does not match n_max");
  }
  const double limit = max_stable_step(rates, rho0.n_max);
  if (step <= 0.0) {
    step = limit;
  } else if (step > limit) {
    std::ostringstream os;
    os << "step " << step << " exceeds RK4 stability bound " << limit << " at n_max = " << rho0.n_max;
    throw StepSizeError(os.str());
  }
  const auto n_steps = static_cast<std::size_t>(std::ceil(t_final / step - 1e-12));
  const double h = n_steps == 0 ? 0.0 : t_final / static_cast<double>(n_steps);

  Rk4Integrator rk(rates, rho0.n_max);
  const double t0 = rho0.t;
  for (std::size_t i = 0; i < n_steps; ++i) rk.step(rho0.rho, h);
  rho0.t = t0 + t_final;

  Evolution out{std::move(rho0), 0.0, true};
  out.tail_population = out.state.tail_population();
  out.truncation_converged = out.tail_population <= tail_tolerance;
  return out;
}

Evolution evolve(const LaserParams& params, TruncatedDensityMatrix rho0, double t_final,
                 double step, double tail_tolerance) {
  return evolve(master_equation_rates(params), std::move(rho0), t_final, step, tail_tolerance);
}

OracleResult steady_state(const LaserParams& params, const OracleOptions& options) {
  const MasterEquationRates rates = master_equation_rates(params);
  const MeanFieldStability stability = mean_field_stability(rates);
  if (!stability.stable) {
    throw ThresholdError("steady_state: mean field is unstable, no normalizable steady state",
                         2.0 * stability.slowest_rate, 2.0 * stability.fastest_rate);
  }
  // Second moments relax at 2 * slowest_rate.
  const double relax = 2.0 * stability.slowest_rate;
  const double max_time = options.max_time > 0.0 ? options.max_time : 80.0 / relax;
  const double check_interval = std::min(0.25 / relax, max_time);

  int n_max = std::min(initial_n_max(params, options), options.n_max_limit);
  TruncatedDensityMatrix state = TruncatedDensityMatrix::vacuum(n_max);
  OracleResult result;

  for (;;) {
    Rk4Integrator rk(rates, n_max);
    const double step = max_stable_step(rates, n_max);
    const auto steps_per_check =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(check_interval / step)));
    const double h = check_interval / static_cast<double>(steps_per_check);

    bool settled = false;
    double elapsed = 0.0;
    while (elapsed < max_time) {
      const Eigen::MatrixXcd& d = rk.derivative(state.rho);
      const double n = photon_number(state.rho);
      const double dn = photon_number(d);
      const cd pair = pair_moment(state.rho);
      const cd dpair = pair_moment(d);
      if (std::abs(dn) <= options.tol * std::max(std::abs(n), 1e-3)
          && std::abs(dpair) <= options.tol * std::max(std::abs(pair), 1e-3)) {
        settled = true;
        break;
      }
      for (std::size_t i = 0; i < steps_per_check; ++i) rk.step(state.rho, h);
      state.t += check_interval;
      elapsed += check_interval;
    }

    const double tail = state.tail_population();
    const bool truncated_ok = tail <= options.tail_tolerance;
    const bool auto_size = options.n_max <= 0;
    if (settled && !truncated_ok && auto_size && n_max < options.n_max_limit) {
      n_max = std::min(2 * n_max, options.n_max_limit);
      state = state.padded(n_max);
      continue;
    }
    result.converged = settled && truncated_ok;
    result.tail_population = tail;
    break;
  }

  result.n_max = n_max;
  result.t = state.t;
  result.field = observables(state);
  result.moments = result.field.moments();
  result.trace_error = std::abs(state.trace() - 1.0);
  result.hermiticity_error = state.hermiticity_error();
  result.min_eigenvalue = state.min_eigenvalue();
  result.state = std::move(state);
  return result;
}

void write_population_csv(std::ostream& os, const TruncatedDensityMatrix& state) {
  const FieldObservables o = observables(state);
  const auto old_precision = os.precision(12);
  os << "# t=" << state.t << "\n# n_max=" << state.n_max << "\n# photon_number=" << o.photon_number
     << "\n# var_plus=" << o.var_plus << "\n# var_minus=" << o.var_minus
     << "\n# trace=" << state.trace() << "\nn,population\n";
  for (int k = 0; k <= state.n_max; ++k) os << k << ',' << state.rho(k, k).real() << '\n';
  os.precision(old_precision);
}

}  // namespace cascade
