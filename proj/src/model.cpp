#include "cascade/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cascade/errors.hpp"
#include "extended_coefficients.hpp"

namespace cascade {

void LaserParams::validate() const {
  auto fail = [](const char* name, double value, const char* rule) {
    std::ostringstream os;
    os << name << " = " << value << " violates " << rule;
    throw DomainError(os.str());
  };
  if (!std::isfinite(gain_a) || gain_a < 0.0) fail("A", gain_a, "A >= 0");
  if (!std::isfinite(kappa) || kappa <= 0.0) fail("kappa", kappa, "kappa > 0");
  if (!std::isfinite(omega) || omega < 0.0) fail("omega", omega, "omega >= 0");
  if (!std::isfinite(eta) || eta < -1.0 || eta > 1.0) fail("eta", eta, "-1 <= eta <= 1");
  if (!std::isfinite(theta)) fail("theta", theta, "finite theta");
}

InitialAtomState derive_initial_state(double eta, double theta) {
  if (!std::isfinite(eta) || eta < -1.0 || eta > 1.0) {
    std::ostringstream os;
    os << "eta = " << eta << " outside [-1, 1]";
    throw DomainError(os.str());
  }
  InitialAtomState s;
  s.rho_aa = 0.5 * (1.0 - eta);
  s.rho_cc = 0.5 * (1.0 + eta);
  s.rho_ac = std::polar(std::sqrt(s.rho_aa * s.rho_cc), theta);
  return s;
}

namespace detail {

ExtendedCoefficients extended_coefficients(const LaserParams& params) {
  params.validate();
  if (params.theta != 0.0) {
    throw UnsupportedPhaseError(
        "closed-form coefficients need theta = 0; use the Fock-space oracle for a complex coherence");
  }
  ExtendedCoefficients k;
  k.a = params.gain_a;
  k.kappa = params.kappa;
  k.w = params.omega;
  k.eta = params.eta;
  const xreal w = k.w;
  const xreal w2 = w * w;
  const xreal raa = (1 - k.eta) / 2;
  const xreal rcc = (1 + k.eta) / 2;
  const xreal rac = std::sqrt(raa * rcc);
  k.root = std::sqrt((1 - k.eta) * (1 + k.eta));

  k.b = (1 + w2) * (1 + w2 / 4);
  k.c = raa * (1 + w2 / 4) - rac * 3 * w / 2 + rcc * 3 * w2 / 4;
  k.d = raa * 3 * w2 / 4 + rac * 3 * w / 2 + rcc * (1 + w2 / 4);
  k.c_e = -raa * w / 2 * (1 - w2 / 2) - rac * (1 - w2 / 2) + rcc * w * (1 + w2 / 4);
  k.c_f = -raa * w * (1 + w2 / 4) - rac * (1 - w2 / 2) + rcc * w / 2 * (1 - w2 / 2);

  k.mu = k.a / k.b * (k.d - k.c) + k.kappa;
  k.beta = k.a / (2 * k.b) * (k.c_e - k.c_f);
  k.lambda_minus = k.mu - 2 * k.beta;
  k.lambda_plus = k.mu + 2 * k.beta;

  // Denominators in their eta-parametrized form; they must coincide with
  // b * lambda_{-/+}.
  const xreal common = k.kappa * k.b + k.a * ((1 - w2 / 2) * k.eta + k.root * 3 * w / 2);
  const xreal split = k.a * w / 2 * (1 + w2);
  k.chi_plus = common - split;
  k.chi_minus = common + split;
  return k;
}

}  // namespace detail

CoefficientSet compute_coefficients(const LaserParams& params) {
  const detail::ExtendedCoefficients x = detail::extended_coefficients(params);
  CoefficientSet k;
  k.gain_a = params.gain_a;
  k.b = double(x.b);
  k.c = double(x.c);
  k.d = double(x.d);
  k.c_e = double(x.c_e);
  k.c_f = double(x.c_f);
  k.mu = double(x.mu);
  k.beta = double(x.beta);
  k.lambda_minus = double(x.lambda_minus);
  k.lambda_plus = double(x.lambda_plus);
  k.chi_plus = double(x.chi_plus);
  k.chi_minus = double(x.chi_minus);
  return k;
}

StabilityReport check_threshold(const CoefficientSet& coeffs) {
  StabilityReport r;
  r.lambda_minus = coeffs.lambda_minus;
  r.lambda_plus = coeffs.lambda_plus;
  r.margin = std::min(coeffs.lambda_minus, coeffs.lambda_plus);
  r.below_threshold = coeffs.lambda_minus > 0.0 && coeffs.lambda_plus > 0.0;
  return r;
}

StabilityReport check_threshold(const LaserParams& params) {
  return check_threshold(compute_coefficients(params));
}

std::optional<double> gain_threshold(double kappa, double omega, double eta) {
  LaserParams probe{0.0, kappa, omega, eta, 0.0};
  probe.validate();
  using detail::xreal;
  const xreal w = omega;
  const xreal w2 = w * w;
  const xreal b = (1 + w2) * (1 + w2 / 4);
  const xreal root = std::sqrt((1 - xreal(eta)) * (1 + xreal(eta)));
  const xreal common = (1 - w2 / 2) * eta + root * 3 * w / 2;
  const xreal split = w / 2 * (1 + w2);

  std::optional<double> limit;
  for (xreal slope : {common - split, common + split}) {
    if (slope < 0) {
      const double a = double(-kappa * b / slope);
      if (!limit || a < *limit) limit = a;
    }
  }
  return limit;
}

}  // namespace cascade
