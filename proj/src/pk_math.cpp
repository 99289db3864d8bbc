#include "popkit/pk_math.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popkit {

namespace {

// Relative gap below which k_a and k_e are treated as equal and the
// removable-singularity limit is used.
constexpr double kRateGapTol = 1e-8;

// (1 - exp(-x)) / x for x >= 0, accurate through the x -> 0 limit.
double one_minus_exp_over(double x) {
  if (x < 1e-5) return 1.0 - 0.5 * x + x * x / 6.0;
  return -std::expm1(-x) / x;
}

// u / (exp(u) - 1), analytic for all u with value 1 at u = 0.
double bernoulli_kernel(double u) {
  if (std::abs(u) < 1e-5) return 1.0 - 0.5 * u + u * u / 12.0;
  return u / std::expm1(u);
}

void check_time(double t) {
  if (!(t >= 0.0)) throw std::domain_error("time must be >= 0");
}

}  // namespace

void NaturalParams::validate() const {
  if (!(clearance > 0.0) || !std::isfinite(clearance))
    throw std::domain_error("clearance must be positive and finite");
  if (!(volume > 0.0) || !std::isfinite(volume))
    throw std::domain_error("volume must be positive and finite");
  if (!(absorption_rate > 0.0) || !std::isfinite(absorption_rate))
    throw std::domain_error("absorption rate must be positive and finite");
  if (!(bioavailability >= 0.0 && bioavailability <= 1.0))
    throw std::domain_error("bioavailability must lie in [0, 1]");
  const double ke = elimination_rate();
  if (!(ke > 0.0) || !std::isfinite(ke))
    throw std::domain_error("derived elimination rate CL/V must be positive and finite");
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double x) {
  if (!(x > 0.0 && x < 1.0)) throw std::domain_error("logit requires an argument in (0, 1)");
  return std::log(x) - std::log1p(-x);
}

double log_sigmoid(double zeta) {
  if (zeta > 0.0) return -std::log1p(std::exp(-zeta));
  return zeta - std::log1p(std::exp(zeta));
}

NaturalParams to_natural(const ModelParams& p) {
  return NaturalParams{std::exp(p.theta1), std::exp(p.theta2), std::exp(p.theta3),
                       logistic(p.zeta)};
}

ModelParams to_model(const NaturalParams& p) {
  p.validate();
  if (!(p.bioavailability > 0.0 && p.bioavailability < 1.0))
    throw std::domain_error("logit transform requires bioavailability strictly inside (0, 1)");
  return ModelParams{std::log(p.clearance), std::log(p.volume), std::log(p.absorption_rate),
                     logit(p.bioavailability)};
}

double amount_absorption_site(double dose, double absorption_rate, double t) {
  if (!(dose >= 0.0)) throw std::domain_error("dose must be >= 0");
  if (!(absorption_rate > 0.0)) throw std::domain_error("absorption rate must be > 0");
  check_time(t);
  return dose * std::exp(-absorption_rate * t);
}

double amount_central(double dose, double absorption_rate, double elimination_rate, double t) {
  if (!(dose >= 0.0)) throw std::domain_error("dose must be >= 0");
  if (!(absorption_rate > 0.0)) throw std::domain_error("absorption rate must be > 0");
  if (!(elimination_rate > 0.0)) throw std::domain_error("elimination rate must be > 0");
  check_time(t);

  const double ka = absorption_rate;
  const double ke = elimination_rate;
  const double gap = std::abs(ka - ke);
  if (gap <= kRateGapTol * std::max(ka, ke)) {
    return dose * ka * t * std::exp(-ka * t);
  }
  // D ka/(ka-ke) (e^{-ke t} - e^{-ka t}) = D ka t e^{-min t} (1-e^{-gap t})/(gap t),
  // which holds for either ordering of the rates.
  const double slow = std::min(ka, ke);
  return dose * ka * t * std::exp(-slow * t) * one_minus_exp_over(gap * t);
}

double concentration(const NaturalParams& params, double dose, double t) {
  params.validate();
  const double amount =
      amount_central(dose, params.absorption_rate, params.elimination_rate(), t);
  return params.bioavailability * amount / params.volume;
}

double log_mean(const ModelParams& params, double dose, double t) {
  if (!(t > 0.0)) throw std::domain_error("log_mean requires t > 0");
  if (!(dose > 0.0)) throw std::domain_error("log_mean requires dose > 0");

  const double log_ka = params.theta3;
  const double log_ke = params.theta1 - params.theta2;
  const double gap = std::abs(log_ka - log_ke);

  // log[(e^{-ke t} - e^{-ka t}) / (ka - ke)]
  double log_g;
  if (gap <= kRateGapTol) {
    log_g = std::log(t) - std::exp(log_ka) * t;
  } else {
    const double slow = std::exp(std::min(log_ka, log_ke));
    // log|ka - ke| without forming the difference of two exponentials
    const double log_rate_gap = std::max(log_ka, log_ke) + std::log(-std::expm1(-gap));
    const double log_x = log_rate_gap + std::log(t);
    double log_psi;  // log[(1 - e^{-x}) / x]
    if (log_x > std::log(40.0)) {
      log_psi = -log_x;  // e^{-x} below double precision
    } else {
      const double x = std::exp(log_x);
      log_psi = (x < 1e-5) ? std::log1p(-0.5 * x + x * x / 6.0)
                           : std::log(-std::expm1(-x)) - std::log(x);
    }
    log_g = std::log(t) - slow * t + log_psi;
  }
  return std::log(dose) + params.theta3 - params.theta2 + log_sigmoid(params.zeta) + log_g;
}

std::array<double, 4> grad_log_mean(const ModelParams& params, double dose, double t) {
  if (!(t > 0.0)) throw std::domain_error("grad_log_mean requires t > 0");
  if (!(dose > 0.0)) throw std::domain_error("grad_log_mean requires dose > 0");

  const double ka = std::exp(params.theta3);
  const double ke = std::exp(params.theta1 - params.theta2);
  const double diff = ka - ke;
  const double u = diff * t;

  // Partial derivatives of log G with respect to k_e and k_a, where
  // G = (e^{-ke t} - e^{-ka t})/(ka - ke). Both have the limit -t/2 at u = 0.
  double q_e, q_a;
  if (std::abs(u) < 1e-5) {
    q_e = -0.5 * t - u * t / 12.0;
    q_a = -0.5 * t + u * t / 12.0;
  } else {
    q_e = (1.0 - bernoulli_kernel(-u)) / diff;
    q_a = (bernoulli_kernel(u) - 1.0) / diff;
  }

  const double g1 = ke * q_e;
  return {g1, -1.0 - g1, 1.0 + ka * q_a, logistic(-params.zeta)};
}

double half_life(double clearance, double volume) {
  if (!(clearance > 0.0)) throw std::domain_error("clearance must be > 0");
  if (!(volume > 0.0)) throw std::domain_error("volume must be > 0");
  return 0.693 * volume / clearance;
}

}  // namespace popkit
