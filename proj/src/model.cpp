#include "popkit/model.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "popkit/pk_math.hpp"

namespace popkit {

void PatientRecord::validate() const {
  if (id.empty()) throw std::invalid_argument("patient id must be non-empty");
  if (!(dose > 0.0) || !std::isfinite(dose))
    throw std::invalid_argument("patient " + id + ": dose must be positive");
  if (times.empty()) throw std::invalid_argument("patient " + id + ": needs >= 1 observation");
  if (times.size() != log_conc.size())
    throw std::invalid_argument("patient " + id + ": times and log_conc lengths differ");
  double prev = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(times[j] > 0.0) || !std::isfinite(times[j]))
      throw std::invalid_argument("patient " + id + ": times must be positive and finite");
    if (times[j] <= prev)
      throw std::invalid_argument("patient " + id + ": times must be strictly increasing");
    if (!std::isfinite(log_conc[j]))
      throw std::invalid_argument("patient " + id + ": log concentrations must be finite");
    prev = times[j];
  }
}

std::size_t Dataset::total_observations() const {
  std::size_t total = 0;
  for (const auto& p : patients) total += p.n_obs();
  return total;
}

void Dataset::validate() const {
  if (patients.empty()) throw std::invalid_argument("dataset must contain >= 1 patient");
  std::set<std::string> ids;
  for (const auto& p : patients) {
    p.validate();
    if (!ids.insert(p.id).second)
      throw std::invalid_argument("duplicate patient id: " + p.id);
  }
}

void Priors::validate() const {
  if (!(zeta_prior_variance > 0.0))
    throw std::invalid_argument("zeta prior variance rho^2 must be > 0");
}

bool ChainState::is_valid() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return false;
  for (double w : omega2)
    if (!(w > 0.0) || !std::isfinite(w)) return false;
  for (double a : alpha)
    if (!std::isfinite(a)) return false;
  if (!std::isfinite(zeta)) return false;
  for (const auto& row : theta)
    for (double v : row)
      if (!std::isfinite(v)) return false;
  return true;
}

void ChainState::validate() const {
  if (!is_valid()) throw std::invalid_argument("chain state violates positivity/finiteness");
}

double residual_ss(const ChainState& state, const Dataset& data, int patient_index) {
  if (patient_index < 0 || patient_index >= data.n_patients())
    throw std::invalid_argument("patient index out of range");
  const PatientRecord& pat = data.patients[patient_index];
  const auto& row = state.theta[patient_index];
  const ModelParams params{row[0], row[1], row[2], state.zeta};
  double ss = 0.0;
  for (std::size_t j = 0; j < pat.n_obs(); ++j) {
    const double r = pat.log_conc[j] - log_mean(params, pat.dose, pat.times[j]);
    ss += r * r;
  }
  return ss;
}

double log_joint(const ChainState& state, const Dataset& data, const Priors& priors) {
  priors.validate();
  if (state.n_patients() != data.n_patients())
    throw std::invalid_argument("state/dataset patient counts differ");
  if (!state.is_valid()) return -std::numeric_limits<double>::infinity();

  const double n = static_cast<double>(data.n_patients());
  double lp = 0.0;

  // Stage 1 likelihood plus the Jeffreys sigma^2 prior.
  double total_ss = 0.0;
  for (int i = 0; i < data.n_patients(); ++i) total_ss += residual_ss(state, data, i);
  const double m_total = static_cast<double>(data.total_observations());
  lp += -(0.5 * m_total + 1.0) * std::log(state.sigma2) - total_ss / (2.0 * state.sigma2);

  // Stage 2 Gaussians with flat alpha_l and Jeffreys omega_l^2 priors.
  for (int l = 0; l < 3; ++l) {
    double dev = 0.0;
    for (int i = 0; i < data.n_patients(); ++i) {
      const double d = state.theta[i][l] - state.alpha[l];
      dev += d * d;
    }
    lp += -(0.5 * n + 1.0) * std::log(state.omega2[l]) - dev / (2.0 * state.omega2[l]);
  }

  // zeta ~ Normal(0, rho^2)
  lp += -state.zeta * state.zeta / (2.0 * priors.zeta_prior_variance);
  return lp;
}

}  // namespace popkit
