#include "cascade/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cascade/errors.hpp"

namespace cascade {
namespace {

struct Derivative {
  std::complex<double> mean_alpha;
  std::complex<double> alpha_sq;
  double occupancy;
};

Derivative rhs(const MomentRates& r, const MomentState& s) {
  return {-0.5 * r.mu * s.mean_alpha + r.beta * std::conj(s.mean_alpha),
          -r.mu * s.alpha_sq + 2.0 * r.beta * s.occupancy + r.pair_source,
          -r.mu * s.occupancy + 2.0 * r.beta * s.alpha_sq.real() + r.occupancy_source};
}

MomentState advance(const MomentState& s, const Derivative& d, double h) {
  MomentState out = s;
  out.mean_alpha += h * d.mean_alpha;
  out.alpha_sq += h * d.alpha_sq;
  out.occupancy += h * d.occupancy;
  out.t += h;
  return out;
}

MomentState rk4_step(const MomentRates& r, const MomentState& s, double h) {
  const Derivative k1 = rhs(r, s);
  const Derivative k2 = rhs(r, advance(s, k1, 0.5 * h));
  const Derivative k3 = rhs(r, advance(s, k2, 0.5 * h));
  const Derivative k4 = rhs(r, advance(s, k3, h));
  MomentState out = s;
  out.mean_alpha += h / 6.0 * (k1.mean_alpha + 2.0 * k2.mean_alpha + 2.0 * k3.mean_alpha + k4.mean_alpha);
  out.alpha_sq += h / 6.0 * (k1.alpha_sq + 2.0 * k2.alpha_sq + 2.0 * k3.alpha_sq + k4.alpha_sq);
  out.occupancy += h / 6.0 * (k1.occupancy + 2.0 * k2.occupancy + 2.0 * k3.occupancy + k4.occupancy);
  out.t = s.t + h;
  return out;
}

void check_step(double step, double t_final, double lambda_minus, double lambda_plus) {
  if (!std::isfinite(t_final) || t_final < 0.0) throw DomainError("t_final must be >= 0");
  if (!std::isfinite(step) || step <= 0.0) throw StepSizeError("step must be > 0");
  const double fastest = std::max(std::abs(lambda_minus), std::abs(lambda_plus));
  if (fastest > 0.0 && step > 1.0 / fastest) {
    std::ostringstream os;
    os << "step " << step << " exceeds stability bound " << 1.0 / fastest;
    throw StepSizeError(os.str());
  }
}

std::size_t step_count(double t_final, double step) {
  return static_cast<std::size_t>(std::ceil(t_final / step - 1e-12));
}

// Mean and centred second moment, merged pairwise so block order fixes the result.
struct RunningStats {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    n += 1.0;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& o) {
    if (o.n == 0.0) return;
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * o.n / total;
    m2 += o.m2 + delta * delta * n * o.n / total;
    n = total;
  }

  double std_error() const { return n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0; }
};

struct BlockStats {
  RunningStats x_plus, x_minus, xsq_plus, xsq_minus;

  void merge(const BlockStats& o) {
    x_plus.merge(o.x_plus);
    x_minus.merge(o.x_minus);
    xsq_plus.merge(o.xsq_plus);
    xsq_minus.merge(o.xsq_minus);
  }
};

}  // namespace

MomentRates MomentRates::from(const CoefficientSet& k) {
  return {k.mu, k.beta, -k.gain_a * k.c_f / k.b, k.gain_a * k.c / k.b};
}

std::vector<MomentState> integrate_moments(const MomentRates& rates, const MomentState& initial,
                                           double t_final, double step, std::size_t stride) {
  check_step(step, t_final, rates.mu - 2.0 * rates.beta, rates.mu + 2.0 * rates.beta);
  const std::size_t n = step_count(t_final, step);
  const double h = n == 0 ? 0.0 : t_final / static_cast<double>(n);

  std::vector<MomentState> series{initial};
  MomentState s = initial;
  for (std::size_t i = 1; i <= n; ++i) {
    s = rk4_step(rates, s, h);
    if (i == n) {
      s.t = initial.t + t_final;
      series.push_back(s);
    } else if (stride != 0 && i % stride == 0) {
      series.push_back(s);
    }
  }
  return series;
}

std::vector<MomentState> integrate_moments(const LaserParams& params, double t_final, double step,
                                           std::size_t stride) {
  const CoefficientSet k = compute_coefficients(params);
  return integrate_moments(MomentRates::from(k), MomentState{}, t_final, step, stride);
}

NoiseStrengths noise_strengths(const CoefficientSet& k) {
  const double scale = -2.0 * k.gain_a / k.b;
  return {scale * (k.c_f - k.c), scale * (k.c_f + k.c)};
}

EnsembleStats sample_trajectories(const LaserParams& params, std::size_t n_traj, double t_final,
                                  double step, std::uint64_t seed, unsigned workers) {
  const CoefficientSet k = compute_coefficients(params);
  const StabilityReport stability = check_threshold(k);
  if (!stability.below_threshold) {
    throw ThresholdError("sample_trajectories: parameters are above threshold", k.lambda_minus,
                         k.lambda_plus);
  }
  if (n_traj < 2) throw DomainError("sample_trajectories: need at least 2 trajectories");
  check_step(step, t_final, k.lambda_minus, k.lambda_plus);

  const std::size_t n_steps = step_count(t_final, step);
  const double h = n_steps == 0 ? 0.0 : t_final / static_cast<double>(n_steps);
  const double sqrt_h = std::sqrt(h);
  const double keep_plus = 1.0 - 0.5 * k.lambda_minus * h;
  const double keep_minus = 1.0 - 0.5 * k.lambda_plus * h;

  const std::size_t n_blocks = (n_traj + kTrajectoryBlock - 1) / kTrajectoryBlock;
  std::vector<BlockStats> blocks(n_blocks);
  parallel_for(
      n_blocks,
      [&](std::size_t b) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal;
        const std::size_t begin = b * kTrajectoryBlock;
        const std::size_t end = std::min(n_traj, begin + kTrajectoryBlock);
        BlockStats& out = blocks[b];
        for (std::size_t traj = begin; traj < end; ++traj) {
          double x_plus = 0.0;
          double x_minus = 0.0;
          for (std::size_t i = 0; i < n_steps; ++i) {
            x_plus = keep_plus * x_plus + sqrt_h * normal(rng);
            x_minus = keep_minus * x_minus + sqrt_h * normal(rng);
          }
          out.x_plus.push(x_plus);
          out.x_minus.push(x_minus);
          out.xsq_plus.push(x_plus * x_plus);
          out.xsq_minus.push(x_minus * x_minus);
        }
      },
      workers);

  BlockStats total;
  for (const BlockStats& b : blocks) total.merge(b);

  const NoiseStrengths s2 = noise_strengths(k);
  EnsembleStats stats;
  stats.n_traj = n_traj;
  stats.seed = seed;
  stats.t_final = t_final;
  stats.step = h;
  stats.noise_plus = std::sqrt(std::complex<double>(s2.plus, 0.0));
  stats.noise_minus = std::sqrt(std::complex<double>(s2.minus, 0.0));
  // alpha = s X  =>  alpha^2 = s^2 X^2, which is real for either sign of s^2.
  stats.alpha_sq_plus = {s2.plus * total.xsq_plus.mean, std::abs(s2.plus) * total.xsq_plus.std_error()};
  stats.alpha_sq_minus = {s2.minus * total.xsq_minus.mean,
                          std::abs(s2.minus) * total.xsq_minus.std_error()};
  stats.mean_alpha_plus = {stats.noise_plus * total.x_plus.mean,
                           std::abs(stats.noise_plus) * total.x_plus.std_error()};
  stats.mean_alpha_minus = {stats.noise_minus * total.x_minus.mean,
                            std::abs(stats.noise_minus) * total.x_minus.std_error()};
  return stats;
}

DecayEnvelopes decay_envelopes(const CoefficientSet& coeffs, double t) {
  const double slow = std::exp(-0.5 * coeffs.lambda_minus * t);
  const double fast = std::exp(-0.5 * coeffs.lambda_plus * t);
  return {0.5 * (slow + fast), 0.5 * (slow - fast)};
}

}  // namespace cascade
