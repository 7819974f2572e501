#include "cascade/analytic.hpp"

#include <cmath>
#include <sstream>

#include "cascade/errors.hpp"
#include "extended_coefficients.hpp"

namespace cascade {
namespace {

using detail::ExtendedCoefficients;
using detail::xreal;

[[noreturn]] void throw_threshold(const char* where, double lambda_minus, double lambda_plus) {
  std::ostringstream os;
  os << where << ": no steady state (lambda_- = " << lambda_minus << ", lambda_+ = " << lambda_plus
     << ")";
  throw ThresholdError(os.str(), lambda_minus, lambda_plus);
}

[[noreturn]] void throw_threshold(const char* where, const ExtendedCoefficients& k) {
  throw_threshold(where, double(k.lambda_minus), double(k.lambda_plus));
}

bool below_threshold(const ExtendedCoefficients& k) {
  return double(k.lambda_minus) > 0.0 && double(k.lambda_plus) > 0.0;
}

// Source strengths -2A(c_f -+ C)/B; the stationary value of <alpha_+-^2> is
// this divided by lambda_-+.
struct QuadratureSources {
  xreal plus;
  xreal minus;
};

QuadratureSources sources(const ExtendedCoefficients& k) {
  const xreal scale = -2 * k.a / k.b;
  return {scale * (k.c_f - k.c), scale * (k.c_f + k.c)};
}

// (1 - exp(-lambda t)) / lambda, continuous through lambda = 0.
xreal saturation(xreal lambda, xreal t) {
  if (lambda == 0) return t;
  return -std::expm1(-lambda * t) / lambda;
}

// Numerators shared by the eta-parametrized steady forms:
//   <alpha_+-^2> = (first +- second) / chi_+-.
struct EtaNumerators {
  xreal first;
  xreal second;
};

EtaNumerators eta_numerators(xreal a, xreal w, xreal eta) {
  const xreal w2 = w * w;
  const xreal root = std::sqrt((1 - eta) * (1 + eta));
  return {a * (w / 2 * (1 - 3 * eta + w2) + root * (1 - w2 / 2)),
          a * (1 - eta + w2 / 2 * (2 + eta) - root * 3 * w / 2)};
}

// Denominator kappa B + A[slope -+ (w/2)(1 + w^2)] shared by the special cases.
struct ChiPair {
  xreal plus;
  xreal minus;
};

ChiPair special_chi(xreal a, xreal kappa, xreal w, xreal slope) {
  const xreal w2 = w * w;
  const xreal kb = kappa * (1 + w2) * (1 + w2 / 4);
  const xreal split = w / 2 * (1 + w2);
  return {kb + a * (slope - split), kb + a * (slope + split)};
}

void require_positive(const char* where, const ChiPair& chi, xreal w) {
  const xreal b = (1 + w * w) * (1 + w * w / 4);
  if (!(double(chi.plus) > 0.0 && double(chi.minus) > 0.0)) {
    throw_threshold(where, double(chi.plus / b), double(chi.minus / b));
  }
}

QuadratureMoments rounded(xreal alpha_sq_plus, xreal alpha_sq_minus) {
  QuadratureMoments m;
  m.alpha_sq_plus = double(alpha_sq_plus);
  m.alpha_sq_minus = double(alpha_sq_minus);
  m.var_plus = double(1 + alpha_sq_plus);
  m.var_minus = double(1 - alpha_sq_minus);
  m.mean_photon = double((alpha_sq_plus - alpha_sq_minus) / 4);
  return m;
}

}  // namespace

QuadratureMoments QuadratureMoments::from_second_moments(double alpha_sq_plus,
                                                         double alpha_sq_minus) {
  QuadratureMoments m;
  m.alpha_sq_plus = alpha_sq_plus;
  m.alpha_sq_minus = alpha_sq_minus;
  m.var_plus = 1.0 + alpha_sq_plus;
  m.var_minus = 1.0 - alpha_sq_minus;
  m.mean_photon = (alpha_sq_plus - alpha_sq_minus) / 4.0;
  return m;
}

QuadratureMoments steady_moments(const LaserParams& params) {
  const ExtendedCoefficients k = detail::extended_coefficients(params);
  if (!below_threshold(k)) throw_threshold("steady_moments", k);
  const QuadratureSources s = sources(k);
  return rounded(s.plus / k.lambda_minus, s.minus / k.lambda_plus);
}

QuadratureMoments steady_moments_closed_form(const LaserParams& params) {
  const ExtendedCoefficients k = detail::extended_coefficients(params);
  if (!below_threshold(k)) throw_threshold("steady_moments_closed_form", k);
  const EtaNumerators n = eta_numerators(k.a, k.w, k.eta);
  return rounded((n.first + n.second) / k.chi_plus, (n.first - n.second) / k.chi_minus);
}

double steady_mean_photon_closed_form(const LaserParams& params) {
  const ExtendedCoefficients k = detail::extended_coefficients(params);
  if (!below_threshold(k)) throw_threshold("steady_mean_photon_closed_form", k);
  const xreal a = k.a;
  const xreal w = k.w;
  const xreal w2 = w * w;
  const xreal eta = k.eta;
  const xreal root = k.root;
  const xreal drive = w / 2 * (1 - 3 * eta) + w2 * w / 2;
  const xreal population = 1 - eta + w2 / 2 * (2 + eta);
  return double(-a * (drive - population) / (4 * k.chi_minus)
                + a * root * (w2 / 2 - 1 - 3 * w / 2) / (4 * k.chi_minus)
                + a * (drive + population) / (4 * k.chi_plus)
                - a * root * (w2 / 2 - 1 + 3 * w / 2) / (4 * k.chi_plus));
}

double steady_variance(const LaserParams& params, Quadrature which) {
  const ExtendedCoefficients k = detail::extended_coefficients(params);
  const QuadratureSources s = sources(k);
  if (which == Quadrature::plus) {
    if (!(double(k.lambda_minus) > 0.0)) throw_threshold("steady_variance(plus)", k);
    return double(1 + s.plus / k.lambda_minus);
  }
  if (!(double(k.lambda_plus) > 0.0)) throw_threshold("steady_variance(minus)", k);
  return double(1 - s.minus / k.lambda_plus);
}

TransientMoments transient_moments(const LaserParams& params, double t) {
  if (!std::isfinite(t) || t < 0.0) throw DomainError("transient_moments: t must be >= 0");
  const ExtendedCoefficients k = detail::extended_coefficients(params);
  const QuadratureSources s = sources(k);
  TransientMoments out;
  out.convergent = below_threshold(k);
  out.moments = rounded(s.plus * saturation(k.lambda_minus, t), s.minus * saturation(k.lambda_plus, t));
  return out;
}

VariancePair variance_undriven(double gain_a, double kappa, double eta) {
  LaserParams{gain_a, kappa, 0.0, eta, 0.0}.validate();
  const xreal a = gain_a;
  const xreal rate = a * eta + kappa;
  if (!(double(rate) > 0.0)) throw_threshold("variance_undriven", double(rate), double(rate));
  const xreal root = std::sqrt((1 - xreal(eta)) * (1 + xreal(eta)));
  return {double((kappa + a * (1 + root)) / rate), double((kappa + a * (1 - root)) / rate)};
}

VariancePair variance_ground(double gain_a, double kappa, double omega) {
  LaserParams{gain_a, kappa, omega, 1.0, 0.0}.validate();
  const xreal a = gain_a;
  const xreal w = omega;
  const xreal w2 = w * w;
  const ChiPair chi = special_chi(a, kappa, w, 1 - w2 / 2);
  require_positive("variance_ground", chi, w);
  const xreal odd = w - w2 * w / 2;
  const xreal even = 3 * w2 / 2;
  return {double(1 - a * (odd - even) / chi.plus), double(1 + a * (odd + even) / chi.minus)};
}

VariancePair variance_balanced(double gain_a, double kappa, double omega) {
  LaserParams{gain_a, kappa, omega, 0.0, 0.0}.validate();
  const xreal w = omega;
  const ChiPair chi = special_chi(gain_a, kappa, w, 3 * w / 2);
  require_positive("variance_balanced", chi, w);
  const EtaNumerators n = eta_numerators(gain_a, w, 0);
  return {double(1 + (n.first + n.second) / chi.plus), double(1 - (n.first - n.second) / chi.minus)};
}

double mean_photon_undriven(double gain_a, double kappa, double eta) {
  LaserParams{gain_a, kappa, 0.0, eta, 0.0}.validate();
  const xreal a = gain_a;
  const xreal rate = a * eta + kappa;
  if (!(double(rate) > 0.0)) throw_threshold("mean_photon_undriven", double(rate), double(rate));
  return double(a * (1 - xreal(eta)) / (2 * rate));
}

double mean_photon_ground(double gain_a, double kappa, double omega) {
  LaserParams{gain_a, kappa, omega, 1.0, 0.0}.validate();
  const xreal a = gain_a;
  const xreal w = omega;
  const xreal w2 = w * w;
  const ChiPair chi = special_chi(a, kappa, w, 1 - w2 / 2);
  require_positive("mean_photon_ground", chi, w);
  const xreal odd = -w + w2 * w / 2;
  const xreal even = 3 * w2 / 2;
  return double(-a * (odd - even) / (4 * chi.minus) + a * (odd + even) / (4 * chi.plus));
}

double mean_photon_balanced(double gain_a, double kappa, double omega) {
  LaserParams{gain_a, kappa, omega, 0.0, 0.0}.validate();
  const xreal w = omega;
  const ChiPair chi = special_chi(gain_a, kappa, w, 3 * w / 2);
  require_positive("mean_photon_balanced", chi, w);
  const EtaNumerators n = eta_numerators(gain_a, w, 0);
  return double(((n.first + n.second) / chi.plus - (n.first - n.second) / chi.minus) / 4);
}

double mean_photon_special(SpecialCase which, double gain_a, double kappa, double free_param) {
  switch (which) {
    case SpecialCase::undriven:
      return mean_photon_undriven(gain_a, kappa, free_param);
    case SpecialCase::ground:
      return mean_photon_ground(gain_a, kappa, free_param);
    case SpecialCase::balanced:
      return mean_photon_balanced(gain_a, kappa, free_param);
  }
  throw DomainError("unknown special case");
}

}  // namespace cascade
