#ifndef POPKIT_MODEL_HPP
#define POPKIT_MODEL_HPP

#include <array>
#include <string>
#include <vector>

namespace popkit {

/// Observations for one patient: a single oral dose and log-transformed
/// plasma concentrations at strictly increasing positive times.
struct PatientRecord {
  std::string id;
  double dose = 0.0;
  std::vector<double> times;
  std::vector<double> log_conc;

  std::size_t n_obs() const { return times.size(); }
  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct Dataset {
  std::vector<PatientRecord> patients;

  int n_patients() const { return static_cast<int>(patients.size()); }
  std::size_t total_observations() const;
  void validate() const;
};

/// Prior hyperparameters. Only the zeta prior variance rho^2 is configurable;
/// the alpha_l priors are flat and the omega_l^2 / sigma^2 priors are
/// Jeffreys, fixed by the model.
struct Priors {
  double zeta_prior_variance = 10.0;

  void validate() const;
};

/// All latent quantities at one Gibbs iteration.
struct ChainState {
  std::vector<std::array<double, 3>> theta;  ///< row per patient: (theta1, theta2, theta3)
  double zeta = 0.0;
  double sigma2 = 1.0;
  std::array<double, 3> alpha{};
  std::array<double, 3> omega2{1.0, 1.0, 1.0};

  int n_patients() const { return static_cast<int>(theta.size()); }
  /// True when sigma2 and every omega2 are positive and all entries finite.
  bool is_valid() const;
  void validate() const;
};

/// Residual sum of squares ||y_i - f_i||^2 for one patient under the state's
/// parameters.
double residual_ss(const ChainState& state, const Dataset& data, int patient_index);

/**
 * Log of the unnormalized joint posterior (constants independent of all
 * parameters dropped). Returns -infinity for states with non-positive
 * variance components rather than throwing, so ratio tests can probe the
 * boundary.
 */
double log_joint(const ChainState& state, const Dataset& data, const Priors& priors);

}  // namespace popkit

#endif  // POPKIT_MODEL_HPP
