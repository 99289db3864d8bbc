#ifndef POPKIT_GIBBS_HPP
#define POPKIT_GIBBS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "popkit/kernels.hpp"
#include "popkit/model.hpp"

namespace popkit {

struct SamplerConfig {
  int n_iterations = 10000;
  int burn_in = 5000;
  int thin = 1;
  std::uint64_t seed = 1;
  KernelConfig theta_kernel = KernelConfig::metropolis();
  KernelKind zeta_kernel = KernelKind::ess;
  bool parallel_patients = false;
  /// Thread cap for the patient-level updates; 0 = hardware concurrency.
  int max_threads = 0;

  void validate() const;
  int n_stored() const { return (n_iterations - burn_in) / thin; }
};

struct BlockAcceptance {
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;
  double rate() const {
    return proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
  }
};

struct AcceptanceStats {
  std::array<BlockAcceptance, 3> theta;  ///< post-burn-in, pooled over patients
  BlockAcceptance zeta;                  ///< Metropolis/MALA zeta kernel only
  BlockAcceptance ridge;                 ///< joint F/V-scale translation move
  std::int64_t zeta_ess_calls = 0;
  std::int64_t zeta_ess_shrinks = 0;
  double zeta_ess_mean_shrinks() const {
    return zeta_ess_calls > 0 ? static_cast<double>(zeta_ess_shrinks) /
                                    static_cast<double>(zeta_ess_calls)
                              : 0.0;
  }
};

/// Retained post-burn-in, thinned states plus run metadata.
struct PosteriorDraws {
  std::vector<ChainState> draws;
  AcceptanceStats acceptance;
  SamplerConfig config;
  std::vector<std::string> patient_ids;
};

/// Raised when a conjugate conditional degenerates (zero sum of squares).
class DegenerateConditionalError : public std::runtime_error {
 public:
  explicit DegenerateConditionalError(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Full conditional of theta_{li} (l in 1..3) as a Gaussian-factored target:
 * prior Normal(alpha_l, omega_l^2), likelihood part -||y_i - f_i||^2/(2 sigma^2)
 * with the gradient composed from grad_log_mean. The returned target snapshots
 * the state scalars; `data` must outlive it.
 */
ScalarTarget conditional_theta(const ChainState& state, const Dataset& data, const Priors& priors,
                               int l, int patient_index);

/// Full conditional of zeta: prior Normal(0, rho^2), likelihood summed over
/// all patients.
ScalarTarget conditional_zeta(const ChainState& state, const Dataset& data, const Priors& priors);

/// sigma^2 | - ~ InverseGamma(sum M_i / 2, total residual SS / 2).
double sample_sigma2(const ChainState& state, const Dataset& data, RngStream& rng);

/// alpha_l | - ~ Normal(mean of theta_l, omega_l^2 / N); l in 1..3.
double sample_alpha(const ChainState& state, int l, RngStream& rng);

/// omega_l^2 | - ~ InverseGamma(N/2, ||theta_l - alpha_l||^2 / 2); l in 1..3.
double sample_omega2(const ChainState& state, int l, RngStream& rng);

/// Curve-sketching initialization: theta2 from dose over peak concentration,
/// theta1 from a terminal-slope fit, theta3 = log(3 k_e), zeta = 0, and
/// variance components from initial residual/spread moments.
ChainState default_init(const Dataset& data);

/**
 * Runs the Gibbs sampler, cycling per iteration through theta1, theta2,
 * theta3 (each per patient), sigma^2, alpha, omega^2, zeta, followed by a
 * joint translation move along the unidentified F/V scale direction (see
 * run_chain's implementation note). Output is bit-identical for identical
 * (data, priors, config, init) regardless of parallel_patients. Requires
 * N >= 2.
 */
PosteriorDraws run_chain(const Dataset& data, const Priors& priors, const SamplerConfig& config,
                         const std::optional<ChainState>& init = std::nullopt);

}  // namespace popkit

#endif  // POPKIT_GIBBS_HPP
