#include "popkit/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <thread>

#include "popkit/pk_math.hpp"

namespace popkit {

namespace {

ModelParams with_coordinate(const std::array<double, 3>& row, double zeta, int l, double x) {
  ModelParams p{row[0], row[1], row[2], zeta};
  switch (l) {
    case 1: p.theta1 = x; break;
    case 2: p.theta2 = x; break;
    case 3: p.theta3 = x; break;
    default: throw std::invalid_argument("theta coordinate l must be 1, 2 or 3");
  }
  return p;
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_iterations <= 0) throw std::invalid_argument("n_iterations must be > 0");
  if (burn_in < 0 || burn_in >= n_iterations)
    throw std::invalid_argument("burn_in must satisfy 0 <= burn_in < n_iterations");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  theta_kernel.validate();
}

ScalarTarget conditional_theta(const ChainState& state, const Dataset& data, const Priors&,
                               int l, int patient_index) {
  if (l < 1 || l > 3) throw std::invalid_argument("theta coordinate l must be 1, 2 or 3");
  if (patient_index < 0 || patient_index >= data.n_patients())
    throw std::invalid_argument("patient index out of range");

  const PatientRecord* pat = &data.patients[patient_index];
  const std::array<double, 3> row = state.theta[patient_index];
  const double zeta = state.zeta;
  const double sigma2 = state.sigma2;

  auto log_lik = [pat, row, zeta, sigma2, l](double x) {
    const ModelParams p = with_coordinate(row, zeta, l, x);
    double ss = 0.0;
    for (std::size_t j = 0; j < pat->n_obs(); ++j) {
      const double r = pat->log_conc[j] - log_mean(p, pat->dose, pat->times[j]);
      ss += r * r;
    }
    return -ss / (2.0 * sigma2);
  };
  auto log_lik_grad = [pat, row, zeta, sigma2, l](double x) {
    const ModelParams p = with_coordinate(row, zeta, l, x);
    double g = 0.0;
    for (std::size_t j = 0; j < pat->n_obs(); ++j) {
      const double f = log_mean(p, pat->dose, pat->times[j]);
      const double df = grad_log_mean(p, pat->dose, pat->times[j])[l - 1];
      g += (f - pat->log_conc[j]) * df;
    }
    return -g / sigma2;
  };
  return gaussian_factored_target(state.alpha[l - 1], state.omega2[l - 1], log_lik,
                                  log_lik_grad);
}

ScalarTarget conditional_zeta(const ChainState& state, const Dataset& data,
                              const Priors& priors) {
  const Dataset* d = &data;
  const auto theta = state.theta;
  const double sigma2 = state.sigma2;

  auto log_lik = [d, theta, sigma2](double zeta) {
    double total = 0.0;
    for (int i = 0; i < d->n_patients(); ++i) {
      const PatientRecord& pat = d->patients[i];
      const ModelParams p{theta[i][0], theta[i][1], theta[i][2], zeta};
      for (std::size_t j = 0; j < pat.n_obs(); ++j) {
        const double r = pat.log_conc[j] - log_mean(p, pat.dose, pat.times[j]);
        total += r * r;
      }
    }
    return -total / (2.0 * sigma2);
  };
  auto log_lik_grad = [d, theta, sigma2](double zeta) {
    double g = 0.0;
    for (int i = 0; i < d->n_patients(); ++i) {
      const PatientRecord& pat = d->patients[i];
      const ModelParams p{theta[i][0], theta[i][1], theta[i][2], zeta};
      for (std::size_t j = 0; j < pat.n_obs(); ++j) {
        const double f = log_mean(p, pat.dose, pat.times[j]);
        const double df = grad_log_mean(p, pat.dose, pat.times[j])[3];
        g += (f - pat.log_conc[j]) * df;
      }
    }
    return -g / sigma2;
  };
  return gaussian_factored_target(0.0, priors.zeta_prior_variance, log_lik, log_lik_grad);
}

double sample_sigma2(const ChainState& state, const Dataset& data, RngStream& rng) {
  double total_ss = 0.0;
  for (int i = 0; i < data.n_patients(); ++i) total_ss += residual_ss(state, data, i);
  if (!(total_ss > 0.0))
    throw DegenerateConditionalError(
        "sigma^2 conditional degenerate: zero total residual sum of squares (perfect fit)");
  const double shape = 0.5 * static_cast<double>(data.total_observations());
  return rng.inverse_gamma(shape, 0.5 * total_ss);
}

double sample_alpha(const ChainState& state, int l, RngStream& rng) {
  if (l < 1 || l > 3) throw std::invalid_argument("alpha index l must be 1, 2 or 3");
  const int n = state.n_patients();
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += state.theta[i][l - 1];
  mean /= static_cast<double>(n);
  return rng.normal(mean, std::sqrt(state.omega2[l - 1] / static_cast<double>(n)));
}

double sample_omega2(const ChainState& state, int l, RngStream& rng) {
  if (l < 1 || l > 3) throw std::invalid_argument("omega^2 index l must be 1, 2 or 3");
  const int n = state.n_patients();
  double dev = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = state.theta[i][l - 1] - state.alpha[l - 1];
    dev += d * d;
  }
  if (!(dev > 0.0))
    throw DegenerateConditionalError(
        "omega^2 conditional degenerate: zero spread of theta around alpha");
  return rng.inverse_gamma(0.5 * static_cast<double>(n), 0.5 * dev);
}

ChainState default_init(const Dataset& data) {
  const int n = data.n_patients();
  ChainState state;
  state.theta.resize(n);
  state.zeta = 0.0;

  constexpr double f0 = 0.9;
  for (int i = 0; i < n; ++i) {
    const PatientRecord& pat = data.patients[i];
    const double max_log_conc = *std::max_element(pat.log_conc.begin(), pat.log_conc.end());
    const double theta2 = std::log(f0 * pat.dose) - max_log_conc;

    // Terminal slope: log-linear fit over the last (up to) three points.
    double ke = 0.0;
    const std::size_t m = pat.n_obs();
    const std::size_t k = std::min<std::size_t>(3, m);
    if (k >= 2) {
      double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
      for (std::size_t j = m - k; j < m; ++j) {
        st += pat.times[j];
        sy += pat.log_conc[j];
        stt += pat.times[j] * pat.times[j];
        sty += pat.times[j] * pat.log_conc[j];
      }
      const double denom = k * stt - st * st;
      if (denom > 0.0) ke = -(k * sty - st * sy) / denom;
    }
    if (!(ke > 0.0) || !std::isfinite(ke)) ke = 1.0 / pat.times.back();

    state.theta[i] = {theta2 + std::log(ke), theta2, std::log(3.0 * ke)};
  }

  for (int l = 0; l < 3; ++l) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += state.theta[i][l];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = state.theta[i][l] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    state.alpha[l] = mean;
    state.omega2[l] = std::max(var, 1e-4);
  }

  double ss = 0.0;
  for (int i = 0; i < n; ++i) ss += residual_ss(state, data, i);
  state.sigma2 = std::max(ss / static_cast<double>(data.total_observations()), 1e-6);
  return state;
}

namespace {

struct ThetaBlockWork {
  std::vector<std::array<double, 3>> step;     // per (patient, l) step sizes
  std::vector<std::array<int, 3>> adapt_round;
  std::vector<std::array<std::int64_t, 3>> proposals;
  std::vector<std::array<std::int64_t, 3>> accepted;
};

// One theta_{li} update; writes only patient-local slots, so distinct
// patients may run concurrently.
void update_theta_coordinate(ChainState& state, const Dataset& data, const Priors& priors,
                             const SamplerConfig& config, ThetaBlockWork& work, int l, int i,
                             int iteration) {
  RngStream rng = RngStream::at(config.seed, static_cast<std::uint32_t>(iteration),
                                static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(i));
  const ScalarTarget target = conditional_theta(state, data, priors, l, i);
  double& coord = state.theta[i][l - 1];
  const bool in_burn_in = iteration <= config.burn_in;

  if (config.theta_kernel.kind == KernelKind::ess) {
    coord = ess_step(target, coord, rng);
    return;
  }

  KernelConfig kc = config.theta_kernel;
  kc.step = work.step[i][l - 1];
  const StepResult r = (kc.kind == KernelKind::mala) ? mala_step(target, coord, kc, rng)
                                                     : metropolis_step(target, coord, kc, rng);
  coord = r.value;
  if (in_burn_in) {
    if (config.theta_kernel.adapt_during_burnin) {
      int& round = work.adapt_round[i][l - 1];
      ++round;
      work.step[i][l - 1] =
          adapt_step_size(kc.step, r.accepted ? 1.0 : 0.0, round, kc.target_acceptance);
    }
  } else {
    ++work.proposals[i][l - 1];
    if (r.accepted) ++work.accepted[i][l - 1];
  }
}

int resolve_threads(const SamplerConfig& config, int n_patients) {
  if (!config.parallel_patients) return 1;
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int t = config.max_threads > 0 ? config.max_threads : hw;
  return std::max(1, std::min(t, n_patients));
}

}  // namespace

PosteriorDraws run_chain(const Dataset& data, const Priors& priors, const SamplerConfig& config,
                         const std::optional<ChainState>& init) {
  data.validate();
  priors.validate();
  config.validate();
  const int n = data.n_patients();
  if (n < 2)
    throw std::invalid_argument("fitting requires >= 2 patients (omega^2 conditional)");
  if (n < 4)
    std::cerr << "popkit: warning: only " << n
              << " patients; variance components will be weakly identified\n";

  ChainState state;
  if (init) {
    init->validate();
    if (init->n_patients() != n)
      throw std::invalid_argument("initial state has wrong patient count");
    state = *init;
  } else {
    state = default_init(data);
  }

  ThetaBlockWork work;
  work.step.assign(n, {config.theta_kernel.step, config.theta_kernel.step,
                       config.theta_kernel.step});
  work.adapt_round.assign(n, {0, 0, 0});
  work.proposals.assign(n, {0, 0, 0});
  work.accepted.assign(n, {0, 0, 0});

  double zeta_step = config.theta_kernel.step;
  int zeta_adapt_round = 0;
  AcceptanceStats stats;

  const int n_threads = resolve_threads(config, n);

  PosteriorDraws out;
  out.config = config;
  out.draws.reserve(static_cast<std::size_t>(std::max(config.n_stored(), 0)));
  for (const auto& p : data.patients) out.patient_ids.push_back(p.id);

  for (int s = 1; s <= config.n_iterations; ++s) {
    // Steps 1-3: per-patient theta updates, independent across patients.
    for (int l = 1; l <= 3; ++l) {
      if (n_threads > 1) {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) {
          pool.emplace_back([&, t]() {
            for (int i = t; i < n; i += n_threads)
              update_theta_coordinate(state, data, priors, config, work, l, i, s);
          });
        }
        for (auto& th : pool) th.join();
      } else {
        for (int i = 0; i < n; ++i)
          update_theta_coordinate(state, data, priors, config, work, l, i, s);
      }
    }

    try {
      // Step 4
      {
        RngStream rng = RngStream::at(config.seed, s, 4, 0);
        state.sigma2 = sample_sigma2(state, data, rng);
      }
      // Step 5
      for (int l = 1; l <= 3; ++l) {
        RngStream rng = RngStream::at(config.seed, s, 5, static_cast<std::uint32_t>(l));
        state.alpha[l - 1] = sample_alpha(state, l, rng);
      }
      // Step 6
      for (int l = 1; l <= 3; ++l) {
        RngStream rng = RngStream::at(config.seed, s, 6, static_cast<std::uint32_t>(l));
        state.omega2[l - 1] = sample_omega2(state, l, rng);
      }
    } catch (const DegenerateConditionalError& e) {
      throw DegenerateConditionalError(std::string(e.what()) + " at iteration " +
                                       std::to_string(s));
    }

    // Step 7: zeta
    {
      RngStream rng = RngStream::at(config.seed, s, 7, 0);
      const ScalarTarget target = conditional_zeta(state, data, priors);
      if (config.zeta_kernel == KernelKind::ess) {
        int shrinks = 0;
        state.zeta = ess_step(target, state.zeta, rng, &shrinks);
        if (s > config.burn_in) {
          ++stats.zeta_ess_calls;
          stats.zeta_ess_shrinks += shrinks;
        }
      } else {
        KernelConfig kc = config.theta_kernel;
        kc.kind = config.zeta_kernel;
        kc.step = zeta_step;
        kc.target_acceptance = (config.zeta_kernel == KernelKind::mala) ? 0.57 : 0.44;
        const StepResult r = (kc.kind == KernelKind::mala)
                                 ? mala_step(target, state.zeta, kc, rng)
                                 : metropolis_step(target, state.zeta, kc, rng);
        state.zeta = r.value;
        if (s <= config.burn_in) {
          if (kc.adapt_during_burnin) {
            ++zeta_adapt_round;
            zeta_step = adapt_step_size(zeta_step, r.accepted ? 1.0 : 0.0, zeta_adapt_round,
                                        kc.target_acceptance);
          }
        } else {
          ++stats.zeta.proposals;
          if (r.accepted) ++stats.zeta.accepted;
        }
      }
    }

    // Ridge move: scaling (F, V, CL) by a common factor leaves the likelihood
    // invariant, so the zeta conditional alone cannot traverse that direction.
    // Propose zeta' around zeta and translate theta_1, theta_2, alpha_1,
    // alpha_2 by log F' - log F. The proposal is a symmetric draw plus a
    // unit-Jacobian translation, so the joint-density ratio is the exact
    // Metropolis-Hastings acceptance.
    {
      RngStream rng = RngStream::at(config.seed, s, 8, 0);
      const double u = rng.uniform();
      const double zeta_prop =
          state.zeta + std::sqrt(priors.zeta_prior_variance) * rng.normal();
      const double shift = log_sigmoid(zeta_prop) - log_sigmoid(state.zeta);
      ChainState candidate = state;
      candidate.zeta = zeta_prop;
      for (int i = 0; i < n; ++i) {
        candidate.theta[i][0] += shift;
        candidate.theta[i][1] += shift;
      }
      candidate.alpha[0] += shift;
      candidate.alpha[1] += shift;
      const double log_ratio =
          log_joint(candidate, data, priors) - log_joint(state, data, priors);
      if (s > config.burn_in) ++stats.ridge.proposals;
      if (std::log(u) < log_ratio) {
        state = std::move(candidate);
        if (s > config.burn_in) ++stats.ridge.accepted;
      }
    }

    if (s > config.burn_in && (s - config.burn_in) % config.thin == 0) out.draws.push_back(state);
  }

  for (int l = 0; l < 3; ++l) {
    for (int i = 0; i < n; ++i) {
      stats.theta[l].proposals += work.proposals[i][l];
      stats.theta[l].accepted += work.accepted[i][l];
    }
  }
  out.acceptance = stats;
  return out;
}

}  // namespace popkit
