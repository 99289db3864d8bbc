#ifndef POPKIT_SIMULATE_HPP
#define POPKIT_SIMULATE_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "popkit/model.hpp"

namespace popkit {

/**
 * Generative truth for a synthetic population study. Variances may be zero
 * (the corresponding quantities are then deterministic), unlike ChainState.
 * doses/design_times hold one entry per patient, or a single entry broadcast
 * to all patients.
 */
struct TruthSpec {
  std::array<double, 3> alpha{};
  std::array<double, 3> omega2{};
  double zeta = 0.0;
  double sigma2 = 0.0;
  std::vector<double> doses;
  std::vector<std::vector<double>> design_times;

  void validate(int n_patients) const;
};

struct SimulatedData {
  Dataset dataset;
  std::vector<std::array<double, 3>> theta;  ///< latent per-patient truth
};

/**
 * Draws theta_{li} ~ Normal(alpha_l, omega_l^2) per patient, then
 * y_ij = log_mean(theta_i, zeta; t_ij) + Normal(0, sigma2) directly in log
 * space. Patient ids are P01, P02, ...
 */
SimulatedData simulate_dataset(const TruthSpec& truth, int n_patients, std::uint64_t seed);

/**
 * Theophylline-scale reference scenario: CL 2.79 L/hr, V 31.61 L,
 * k_a 1.38 /hr, F 0.8, dose 320 mg, ten sampling times over 24 h,
 * sigma 0.1 on the log scale.
 */
TruthSpec reference_truth();

}  // namespace popkit

#endif  // POPKIT_SIMULATE_HPP
