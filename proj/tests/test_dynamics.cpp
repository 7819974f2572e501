#include <doctest.h>

#include <cmath>

#include "cascade/analytic.hpp"
#include "cascade/dynamics.hpp"
#include "cascade/errors.hpp"
#include "cascade/model.hpp"

using namespace cascade;

namespace {

LaserParams point(double a, double kappa, double omega, double eta) {
  LaserParams p;
  p.gain_a = a;
  p.kappa = kappa;
  p.omega = omega;
  p.eta = eta;
  return p;
}

double rel(double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); }

double terminal_error(const LaserParams& p, double t, double step) {
  const MomentState end = integrate_moments(p, t, step).back();
  const QuadratureMoments exact = transient_moments(p, t).moments;
  return std::abs(end.alpha_sq_plus() - exact.alpha_sq_plus)
         + std::abs(end.alpha_sq_minus() - exact.alpha_sq_minus);
}

}  // namespace

TEST_CASE("decay envelopes") {
  CoefficientSet k;
  k.lambda_minus = 0.5;
  k.lambda_plus = 1.5;
  const DecayEnvelopes zero = decay_envelopes(k, 0.0);
  CHECK(zero.a_plus == 1.0);
  CHECK(zero.a_minus == 0.0);
  const DecayEnvelopes two = decay_envelopes(k, 2.0);
  CHECK(two.a_plus == doctest::Approx(0.5 * (std::exp(-0.5) + std::exp(-1.5))));
  CHECK(two.a_minus == doctest::Approx(0.5 * (std::exp(-0.5) - std::exp(-1.5))));

  const CoefficientSet undriven = compute_coefficients(point(0.33, 0.2, 0.0, 0.3));
  for (double t : {0.1, 1.0, 10.0}) CHECK(decay_envelopes(undriven, t).a_minus == 0.0);
}

TEST_CASE("moment rates") {
  const LaserParams p = point(0.33, 0.2, 1.0, 0.5);
  const CoefficientSet k = compute_coefficients(p);
  const MomentRates r = MomentRates::from(k);
  CHECK(r.mu == k.mu);
  CHECK(r.beta == k.beta);
  CHECK(r.pair_source == doctest::Approx(-0.33 * k.c_f / k.b));
  CHECK(r.occupancy_source == doctest::Approx(0.33 * k.c / k.b));
}

TEST_CASE("moment integrator reproduces the closed forms") {
  const LaserParams p = point(0.33, 0.2, 1.0, 0.5);
  const CoefficientSet k = compute_coefficients(p);
  const double t = 40.0 / k.lambda_minus;
  const auto series = integrate_moments(p, t, 0.01, 1000);
  CHECK(series.front().t == 0.0);
  CHECK(series.back().t == doctest::Approx(t));
  for (const MomentState& m : series) {
    const QuadratureMoments exact = transient_moments(p, m.t).moments;
    CHECK(std::abs(m.alpha_sq_plus() - exact.alpha_sq_plus) <= 1e-9 * exact.alpha_sq_plus + 1e-15);
    CHECK(std::abs(m.alpha_sq_minus() - exact.alpha_sq_minus) <= 1e-9 * exact.alpha_sq_minus + 1e-15);
    // Vacuum start keeps the mean field at zero.
    CHECK(std::abs(m.mean_alpha) == 0.0);
  }
  const QuadratureMoments ss = steady_moments(p);
  CHECK(rel(series.back().alpha_sq_plus(), ss.alpha_sq_plus) < 1e-8);
  CHECK(rel(series.back().alpha_sq_minus(), ss.alpha_sq_minus) < 1e-8);
}

TEST_CASE("series stride") {
  const LaserParams p = point(0.33, 0.2, 1.0, 0.5);
  CHECK(integrate_moments(p, 1.0, 0.1).size() == 2);
  CHECK(integrate_moments(p, 1.0, 0.1, 2).size() == 6);
  CHECK(integrate_moments(p, 1.0, 0.1, 3).size() == 5);  // 0, 3, 6, 9 and the end
  CHECK(integrate_moments(p, 0.0, 0.1).size() == 1);
}

TEST_CASE("mean field decays with the envelopes") {
  const LaserParams p = point(0.33, 0.2, 1.0, 0.5);
  const CoefficientSet k = compute_coefficients(p);
  MomentState start;
  start.mean_alpha = {0.3, -0.2};
  const double t = 3.0;
  const MomentState end = integrate_moments(MomentRates::from(k), start, t, 0.001).back();
  const DecayEnvelopes e = decay_envelopes(k, t);
  // alpha(t) = a_+ alpha(0) + a_- alpha*(0).
  const std::complex<double> expect = e.a_plus * start.mean_alpha + e.a_minus * std::conj(start.mean_alpha);
  CHECK(std::abs(end.mean_alpha - expect) < 1e-12);
}

TEST_CASE("fourth-order convergence") {
  const LaserParams p = point(0.5, 0.2, 1.0, 0.3);
  const CoefficientSet k = compute_coefficients(p);
  const double fastest = std::max(k.lambda_minus, k.lambda_plus);
  const double t = 5.0 / k.lambda_minus;
  const double e1 = terminal_error(p, t, 0.8 / fastest);
  const double e2 = terminal_error(p, t, 0.4 / fastest);
  const double e3 = terminal_error(p, t, 0.2 / fastest);
  const double order1 = std::log2(e1 / e2);
  const double order2 = std::log2(e2 / e3);
  CHECK(order1 == doctest::Approx(4.0).epsilon(0.075));
  CHECK(order2 == doctest::Approx(4.0).epsilon(0.075));
}

TEST_CASE("linearity in the sources") {
  const LaserParams p = point(0.5, 0.2, 1.0, 0.3);
  MomentRates r = MomentRates::from(compute_coefficients(p));
  const double t = 60.0;
  const MomentState one = integrate_moments(r, {}, t, 0.01).back();
  r.pair_source *= 2.0;
  r.occupancy_source *= 2.0;
  const MomentState two = integrate_moments(r, {}, t, 0.01).back();
  CHECK(rel(two.alpha_sq_plus(), 2.0 * one.alpha_sq_plus()) < 1e-13);
  CHECK(rel(two.alpha_sq_minus(), 2.0 * one.alpha_sq_minus()) < 1e-13);
}

TEST_CASE("step validation") {
  const LaserParams p = point(0.5, 0.2, 1.0, 0.3);
  const CoefficientSet k = compute_coefficients(p);
  const double bound = 1.0 / std::max(k.lambda_minus, k.lambda_plus);
  CHECK_NOTHROW(integrate_moments(p, 1.0, bound));
  CHECK_THROWS_AS(integrate_moments(p, 1.0, bound * 1.01), StepSizeError);
  CHECK_THROWS_AS(integrate_moments(p, 1.0, 0.0), StepSizeError);
  CHECK_THROWS_AS(integrate_moments(p, -1.0, 0.1), DomainError);
  CHECK_THROWS_AS(sample_trajectories(p, 100, 1.0, bound * 2.0, 1), StepSizeError);
}

TEST_CASE("noise strengths") {
  const CoefficientSet k = compute_coefficients(point(0.33, 0.2, 0.0, 0.3));
  const NoiseStrengths s = noise_strengths(k);
  CHECK(s.plus == doctest::Approx(-2.0 * 0.33 * (k.c_f - k.c) / k.b));
  CHECK(s.minus == doctest::Approx(-2.0 * 0.33 * (k.c_f + k.c) / k.b));
  // Stationary Ornstein-Uhlenbeck variance s^2 / lambda is the steady moment.
  const QuadratureMoments m = steady_moments(point(0.33, 0.2, 0.0, 0.3));
  CHECK(s.plus / k.lambda_minus == doctest::Approx(m.alpha_sq_plus));
  CHECK(s.minus / k.lambda_plus == doctest::Approx(m.alpha_sq_minus));

  const NoiseStrengths ground = noise_strengths(compute_coefficients(point(0.7, 0.2, 0.0, 1.0)));
  CHECK(ground.plus == 0.0);
  CHECK(ground.minus == 0.0);
}

TEST_CASE("sampler is deterministic and independent of the worker count") {
  const LaserParams p = point(0.33, 0.2, 0.0, 0.3);
  const EnsembleStats a = sample_trajectories(p, 1000, 5.0, 0.01, 42, 1);
  const EnsembleStats b = sample_trajectories(p, 1000, 5.0, 0.01, 42, 4);
  const EnsembleStats c = sample_trajectories(p, 1000, 5.0, 0.01, 43, 1);
  CHECK(a.alpha_sq_plus.mean == b.alpha_sq_plus.mean);
  CHECK(a.alpha_sq_plus.std_error == b.alpha_sq_plus.std_error);
  CHECK(a.alpha_sq_minus.mean == b.alpha_sq_minus.mean);
  CHECK(a.mean_alpha_plus.mean == b.mean_alpha_plus.mean);
  CHECK(a.alpha_sq_plus.mean != c.alpha_sq_plus.mean);
  CHECK(a.n_traj == 1000);
  CHECK(a.seed == 42);
}

TEST_CASE("sampler statistics") {
  const LaserParams p = point(0.33, 0.2, 0.0, 0.3);
  const CoefficientSet k = compute_coefficients(p);
  const double t = 30.0 / k.lambda_minus;
  const double step = 0.01 / std::max(k.lambda_minus, k.lambda_plus);
  const EnsembleStats e = sample_trajectories(p, 10000, t, step, 2024);
  const QuadratureMoments exact = transient_moments(p, t).moments;
  CHECK(std::abs(e.alpha_sq_plus.mean - exact.alpha_sq_plus) < 3.0 * e.alpha_sq_plus.std_error);
  CHECK(std::abs(e.alpha_sq_minus.mean - exact.alpha_sq_minus) < 3.0 * e.alpha_sq_minus.std_error);
  CHECK(std::abs(e.mean_alpha_plus.mean) < 3.0 * e.mean_alpha_plus.std_error);
  CHECK(std::abs(e.mean_alpha_minus.mean) < 3.0 * e.mean_alpha_minus.std_error);
  CHECK(e.alpha_sq_plus.std_error < 0.05 * exact.alpha_sq_plus);
}

TEST_CASE("imaginary noise reproduces a negative moment") {
  // More population on top without drive: the minus quadrature has s^2 < 0.
  const LaserParams p = point(0.5, 0.4, 0.0, -0.4);
  const CoefficientSet k = compute_coefficients(p);
  REQUIRE(noise_strengths(k).minus < 0.0);
  const double t = 30.0 / k.lambda_minus;
  const EnsembleStats e = sample_trajectories(p, 10000, t, 0.01 / k.lambda_plus, 5);
  CHECK(e.noise_minus.real() == 0.0);
  CHECK(e.noise_minus.imag() > 0.0);
  const QuadratureMoments exact = transient_moments(p, t).moments;
  REQUIRE(exact.alpha_sq_minus < 0.0);
  CHECK(e.alpha_sq_minus.mean < 0.0);
  CHECK(std::abs(e.alpha_sq_minus.mean - exact.alpha_sq_minus) < 3.0 * e.alpha_sq_minus.std_error);
}

TEST_CASE("zero noise gives identically zero trajectories") {
  const LaserParams p = point(0.7, 0.2, 0.0, 1.0);
  const EnsembleStats e = sample_trajectories(p, 300, 10.0, 0.01, 1);
  CHECK(e.alpha_sq_plus.mean == 0.0);
  CHECK(e.alpha_sq_minus.mean == 0.0);
  CHECK(e.alpha_sq_plus.std_error == 0.0);
}

TEST_CASE("sampler input errors") {
  CHECK_THROWS_AS(sample_trajectories(point(0.99, 0.2, 10.1, 1.0), 100, 1.0, 0.001, 1), ThresholdError);
  CHECK_THROWS_AS(sample_trajectories(point(0.33, 0.2, 0.0, 0.3), 1, 1.0, 0.01, 1), DomainError);
}
