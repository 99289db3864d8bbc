#include "popkit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace popkit {

ScalarTarget gaussian_factored_target(double prior_mean, double prior_variance,
                                      std::function<double(double)> log_lik,
                                      std::function<double(double)> log_lik_grad) {
  if (!(prior_variance > 0.0))
    throw std::invalid_argument("gaussian_factored_target: prior variance must be > 0");
  if (!log_lik) throw std::invalid_argument("gaussian_factored_target: likelihood required");

  ScalarTarget t;
  t.has_gaussian_factor = true;
  t.prior_mean = prior_mean;
  t.prior_variance = prior_variance;
  t.log_likelihood_part = log_lik;
  t.log_density = [log_lik, prior_mean, prior_variance](double x) {
    const double d = x - prior_mean;
    return log_lik(x) - d * d / (2.0 * prior_variance);
  };
  if (log_lik_grad) {
    t.log_density_gradient = [log_lik_grad, prior_mean, prior_variance](double x) {
      return log_lik_grad(x) - (x - prior_mean) / prior_variance;
    };
  }
  return t;
}

KernelConfig KernelConfig::metropolis(double step) {
  return KernelConfig{KernelKind::metropolis, step, true, 0.44};
}

KernelConfig KernelConfig::mala(double step) {
  return KernelConfig{KernelKind::mala, step, true, 0.57};
}

KernelConfig KernelConfig::ess() { return KernelConfig{KernelKind::ess, 1.0, false, 0.44}; }

void KernelConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("kernel step size must be > 0");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw std::invalid_argument("target acceptance must lie in (0, 1)");
}

StepResult metropolis_step(const ScalarTarget& target, double current, const KernelConfig& config,
                           RngStream& rng) {
  const double u = rng.uniform();
  const double proposal = current + config.step * rng.normal();
  const double log_ratio = target.log_density(proposal) - target.log_density(current);
  // NaN or -inf ratios fail the comparison and reject.
  if (std::log(u) < log_ratio) return {proposal, true};
  return {current, false};
}

double mala_log_accept_ratio(const ScalarTarget& target, double from, double to, double step) {
  const double log_pi_to = target.log_density(to);
  if (!std::isfinite(log_pi_to)) return -std::numeric_limits<double>::infinity();
  const double log_pi_from = target.log_density(from);

  const double mean_fwd = from + step * target.log_density_gradient(from);
  const double mean_bwd = to + step * target.log_density_gradient(to);
  const double fwd = to - mean_fwd;
  const double bwd = from - mean_bwd;
  const double log_j_fwd = -fwd * fwd / (4.0 * step);
  const double log_j_bwd = -bwd * bwd / (4.0 * step);
  return (log_pi_to - log_pi_from) + (log_j_bwd - log_j_fwd);
}

StepResult mala_step(const ScalarTarget& target, double current, const KernelConfig& config,
                     RngStream& rng) {
  if (!target.log_density_gradient)
    throw std::invalid_argument("mala_step requires a target gradient");
  const double u = rng.uniform();
  // drift current - step * grad U = current + step * grad log pi
  const double mean = current + config.step * target.log_density_gradient(current);
  const double proposal = mean + std::sqrt(2.0 * config.step) * rng.normal();
  if (!std::isfinite(proposal)) return {current, false};
  const double log_ratio = mala_log_accept_ratio(target, current, proposal, config.step);
  if (std::log(u) < log_ratio) return {proposal, true};
  return {current, false};
}

double ess_point_on_ellipse(double current, double mu, double nu, double phi) {
  return current + (std::cos(phi) - 1.0) * (current - mu) + std::sin(phi) * (nu - mu);
}

double ess_step(const ScalarTarget& target, double current, RngStream& rng, int* shrink_count) {
  if (!target.has_gaussian_factor || !target.log_likelihood_part)
    throw std::invalid_argument("ess_step requires a Gaussian-factored target");

  const double mu = target.prior_mean;
  const double sd = std::sqrt(target.prior_variance);
  const double nu = mu + sd * rng.normal();
  const double log_u = std::log(rng.uniform());
  const double log_lik_current = target.log_likelihood_part(current);

  double phi = -M_PI + 2.0 * M_PI * rng.uniform();
  double phi_min = -M_PI;
  double phi_max = M_PI;
  int shrinks = 0;
  for (;;) {
    const double proposal = ess_point_on_ellipse(current, mu, nu, phi);
    const double log_lik = target.log_likelihood_part(proposal);
    // NaN-safe: a non-finite likelihood fails the test and shrinks the bracket.
    if (log_u < log_lik - log_lik_current) {
      if (shrink_count) *shrink_count = shrinks;
      return proposal;
    }
    if (phi > 0.0)
      phi_max = phi;
    else
      phi_min = phi;
    ++shrinks;
    if (!(phi_max - phi_min > 0.0) || shrinks > 10000) {
      // Degenerate bracket: the slice has collapsed onto the current state.
      if (shrink_count) *shrink_count = shrinks;
      return current;
    }
    phi = phi_min + (phi_max - phi_min) * rng.uniform();
  }
}

double adapt_step_size(double step, double acceptance_rate, int round, double target_acceptance) {
  const double gain = std::pow(static_cast<double>(std::max(round, 1)), -0.6);
  return step * std::exp(gain * (acceptance_rate - target_acceptance));
}

}  // namespace popkit
