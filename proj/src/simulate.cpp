#include "popkit/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "popkit/pk_math.hpp"
#include "popkit/rng.hpp"

namespace popkit {

namespace {

// Substream tags for the generative draws (iteration slot 0).
constexpr std::uint32_t kBlockTheta = 21;
constexpr std::uint32_t kBlockNoise = 22;

std::string patient_label(int index, int n) {
  int width = 2;
  for (int v = n; v >= 100; v /= 10) ++width;
  std::string digits = std::to_string(index + 1);
  return "P" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

void TruthSpec::validate(int n_patients) const {
  if (n_patients < 2) throw std::invalid_argument("simulation requires >= 2 patients");
  for (double a : alpha)
    if (!std::isfinite(a)) throw std::invalid_argument("alpha must be finite");
  for (double w : omega2)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("omega^2 must be >= 0 and finite");
  if (!std::isfinite(zeta)) throw std::invalid_argument("zeta must be finite");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("sigma^2 must be >= 0 and finite");
  if (doses.size() != 1 && doses.size() != static_cast<std::size_t>(n_patients))
    throw std::invalid_argument("doses must hold 1 or N entries");
  for (double d : doses)
    if (!(d > 0.0)) throw std::invalid_argument("doses must be positive");
  if (design_times.size() != 1 && design_times.size() != static_cast<std::size_t>(n_patients))
    throw std::invalid_argument("design_times must hold 1 or N entries");
  for (const auto& grid : design_times) {
    if (grid.empty()) throw std::invalid_argument("design_times entries must be non-empty");
    double prev = 0.0;
    for (double t : grid) {
      if (!(t > prev)) throw std::invalid_argument("design times must be positive increasing");
      prev = t;
    }
  }
}

SimulatedData simulate_dataset(const TruthSpec& truth, int n_patients, std::uint64_t seed) {
  truth.validate(n_patients);

  SimulatedData out;
  out.theta.resize(n_patients);
  out.dataset.patients.resize(n_patients);

  const double noise_sd = std::sqrt(truth.sigma2);
  for (int i = 0; i < n_patients; ++i) {
    const double dose = truth.doses.size() == 1 ? truth.doses[0] : truth.doses[i];
    const auto& grid = truth.design_times.size() == 1 ? truth.design_times[0]
                                                      : truth.design_times[i];

    RngStream theta_rng = RngStream::at(seed, 0, kBlockTheta, static_cast<std::uint32_t>(i));
    std::array<double, 3>& theta = out.theta[i];
    for (int l = 0; l < 3; ++l)
      theta[l] = truth.alpha[l] + std::sqrt(truth.omega2[l]) * theta_rng.normal();

    PatientRecord& pat = out.dataset.patients[i];
    pat.id = patient_label(i, n_patients);
    pat.dose = dose;
    pat.times = grid;
    pat.log_conc.resize(grid.size());

    const ModelParams params{theta[0], theta[1], theta[2], truth.zeta};
    RngStream noise_rng = RngStream::at(seed, 0, kBlockNoise, static_cast<std::uint32_t>(i));
    for (std::size_t j = 0; j < grid.size(); ++j)
      pat.log_conc[j] = log_mean(params, dose, grid[j]) + noise_sd * noise_rng.normal();
  }
  out.dataset.validate();
  return out;
}

TruthSpec reference_truth() {
  TruthSpec truth;
  truth.alpha = {std::log(2.79), std::log(31.61), std::log(1.38)};
  truth.omega2 = {0.04, 0.04, 0.09};
  truth.zeta = logit(0.8);
  truth.sigma2 = 0.01;
  truth.doses = {320.0};
  truth.design_times = {{0.25, 0.5, 1.0, 2.0, 3.5, 5.0, 7.0, 9.0, 12.0, 24.0}};
  return truth;
}

}  // namespace popkit
