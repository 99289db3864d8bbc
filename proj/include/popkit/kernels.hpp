#ifndef POPKIT_KERNELS_HPP
#define POPKIT_KERNELS_HPP

#include <functional>

#include "popkit/rng.hpp"

namespace popkit {

/**
 * A one-dimensional unnormalized target density.
 *
 * When the density factors as likelihood x Gaussian prior the factorization
 * is carried explicitly (prior_mean, prior_variance, log_likelihood_part);
 * the elliptical slice sampler requires it. log_density_gradient may be
 * empty; MALA requires it.
 */
struct ScalarTarget {
  std::function<double(double)> log_density;
  std::function<double(double)> log_density_gradient;

  bool has_gaussian_factor = false;
  double prior_mean = 0.0;
  double prior_variance = 1.0;
  std::function<double(double)> log_likelihood_part;
};

/**
 * Builds a ScalarTarget from the factorization
 *   log pi(x) = log_lik(x) - (x - prior_mean)^2 / (2 prior_variance) + const,
 * so log_density and log_likelihood_part are consistent by construction.
 */
ScalarTarget gaussian_factored_target(double prior_mean, double prior_variance,
                                      std::function<double(double)> log_lik,
                                      std::function<double(double)> log_lik_grad = nullptr);

enum class KernelKind { metropolis, mala, ess };

struct KernelConfig {
  KernelKind kind = KernelKind::metropolis;
  /// Proposal sd for Metropolis, Langevin step size for MALA; ignored by ESS.
  double step = 0.25;
  bool adapt_during_burnin = true;
  /// 0.44 is the 1-D random-walk optimum, 0.57 the MALA optimum.
  double target_acceptance = 0.44;

  static KernelConfig metropolis(double step = 0.25);
  static KernelConfig mala(double step = 0.1);
  static KernelConfig ess();
  void validate() const;
};

struct StepResult {
  double value;
  bool accepted;
};

/**
 * Random-walk Metropolis update: proposes Normal(current, step^2) and accepts
 * with probability min{pi(x*)/pi(x), 1}. Non-finite proposal densities are
 * rejected. Consumes the stream in the order (threshold u, proposal normal).
 */
StepResult metropolis_step(const ScalarTarget& target, double current, const KernelConfig& config,
                           RngStream& rng);

/**
 * Metropolis-adjusted Langevin update: proposes
 * Normal(current - step * grad U(current), 2 step) with U = -log pi, and
 * accepts with the Metropolis-Hastings ratio including the asymmetric
 * proposal correction. Throws std::invalid_argument when the target carries
 * no gradient. Stream order matches metropolis_step.
 */
StepResult mala_step(const ScalarTarget& target, double current, const KernelConfig& config,
                     RngStream& rng);

/// Log MH acceptance ratio of the MALA move from -> to (used by mala_step;
/// exposed so reciprocity can be checked directly).
double mala_log_accept_ratio(const ScalarTarget& target, double from, double to, double step);

/// Point on the ellipse through `current` and auxiliary draw `nu`, centered
/// at `mu`. Exactly equal to `current` at phi = 0.
double ess_point_on_ellipse(double current, double mu, double nu, double phi);

/**
 * Elliptical slice sampling update for targets with a Gaussian factor.
 * Draws nu ~ Normal(prior_mean, prior_variance), threshold u, angle
 * phi ~ Uniform(-pi, pi], then shrinks the angle bracket toward zero until a
 * point on the ellipse passes the likelihood-ratio criterion. Always returns;
 * the bracket width strictly decreases each retry. shrink_count, when given,
 * receives the number of bracket shrinks performed.
 */
double ess_step(const ScalarTarget& target, double current, RngStream& rng,
                int* shrink_count = nullptr);

/**
 * Robbins-Monro step-size update used during burn-in:
 *   log step <- log step + round^{-0.6} (acceptance_rate - target_acceptance).
 */
double adapt_step_size(double step, double acceptance_rate, int round, double target_acceptance);

}  // namespace popkit

#endif  // POPKIT_KERNELS_HPP
