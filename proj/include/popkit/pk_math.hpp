#ifndef POPKIT_PK_MATH_HPP
#define POPKIT_PK_MATH_HPP

#include <array>

namespace popkit {

/**
 * Pharmacokinetic parameters on their natural scale for the one-compartment
 * open model with first-order absorption and elimination.
 *
 * The elimination rate constant is derived as k_e = CL / V.
 */
struct NaturalParams {
  double clearance;        ///< CL, volume per time (> 0)
  double volume;           ///< V, apparent volume of distribution (> 0)
  double absorption_rate;  ///< k_a, 1/time (> 0)
  double bioavailability;  ///< F, fraction of the dose absorbed, in [0, 1]

  double elimination_rate() const { return clearance / volume; }
  /// Throws std::domain_error when any invariant is violated.
  void validate() const;
};

/**
 * Unconstrained model-scale parameters:
 * theta1 = log CL, theta2 = log V, theta3 = log k_a, zeta = logit F.
 */
struct ModelParams {
  double theta1;
  double theta2;
  double theta3;
  double zeta;
};

NaturalParams to_natural(const ModelParams& p);
/// Inverse transform; F must lie strictly inside (0, 1).
ModelParams to_model(const NaturalParams& p);

/// Drug amount remaining at the absorption site: D exp(-k_a t).
double amount_absorption_site(double dose, double absorption_rate, double t);

/**
 * Drug amount in the central compartment,
 *   A(t) = D k_a / (k_a - k_e) * (exp(-k_e t) - exp(-k_a t)),
 * evaluated in a cancellation-free form valid for either sign of k_a - k_e.
 * Within |k_a - k_e| <= 1e-8 max(k_a, k_e) the removable-singularity limit
 * D k_a t exp(-k_a t) is used instead.
 */
double amount_central(double dose, double absorption_rate, double elimination_rate, double t);

/// Plasma concentration F A(t) / V with k_e = CL / V.
double concentration(const NaturalParams& params, double dose, double t);

/**
 * Log of the concentration as a function of the model-scale parameters.
 * Computed with log/log1p/expm1 so the result stays finite wherever the
 * true log-concentration is representable; requires t > 0 and dose > 0.
 */
double log_mean(const ModelParams& params, double dose, double t);

/// Analytic gradient of log_mean with respect to (theta1, theta2, theta3, zeta).
std::array<double, 4> grad_log_mean(const ModelParams& params, double dose, double t);

/// Half-life 0.693 V / CL.
double half_life(double clearance, double volume);

/// log(F) for F = logistic(zeta), overflow-safe for any finite zeta.
double log_sigmoid(double zeta);
/// logistic(x) = 1 / (1 + exp(-x)).
double logistic(double x);
/// log(x / (1 - x)) for x strictly inside (0, 1).
double logit(double x);

}  // namespace popkit

#endif  // POPKIT_PK_MATH_HPP
