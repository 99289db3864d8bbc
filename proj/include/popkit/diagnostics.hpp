#ifndef POPKIT_DIAGNOSTICS_HPP
#define POPKIT_DIAGNOSTICS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popkit/gibbs.hpp"

namespace popkit {

/// Back-transformed (exp or inverse-logit) companion of a model-scale summary.
/// Interval endpoints are the transforms of the model-scale quantiles, so the
/// monotone transform commutes with them exactly; the mean is the average of
/// the transformed draws (the posterior mean on the natural scale).
struct NaturalSummary {
  std::string name;
  double mean;
  double q025;
  double q500;
  double q975;
};

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q500 = 0.0;
  double q975 = 0.0;
  std::vector<double> autocorrelation;  ///< lags 0..L actually used for the ESS
  double effective_sample_size = 0.0;
  std::optional<NaturalSummary> natural_scale;
};

/// Quantile by linear interpolation of order statistics (R type 7).
double quantile(std::vector<double> values, double p);

/// Autocorrelations rho_0..rho_{max_lag} (biased estimator).
std::vector<double> autocorrelations(std::span<const double> chain, int max_lag);

/**
 * ESS by the initial-positive-sequence rule: the autocorrelation sum is
 * truncated at the first lag with rho <= 0.05 (or a negative adjacent pair),
 * capped at n/4 lags; the result is clipped to [1, n]. A constant chain
 * reports ESS 1.
 */
double effective_sample_size(std::span<const double> chain);

/// Pearson correlation of two equal-length series.
double correlation(std::span<const double> a, std::span<const double> b);

/// Gelman-Rubin potential scale reduction across independent chains
/// (multi-seed helper; the tool runs a single chain by default).
double rhat(const std::vector<std::vector<double>>& chains);

/**
 * Summaries for the population-level parameters alpha_1..3, omega^2_1..3,
 * sigma^2 and zeta, with natural-scale companions CL_pop, V_pop, ka_pop
 * (exp) and F (inverse logit). Requires >= 10 draws.
 */
std::vector<ParameterSummary> summarize(const PosteriorDraws& draws);

struct PredictiveBand {
  std::vector<double> time;
  std::vector<double> lower;   ///< 2.5% quantile of exp(f)
  std::vector<double> median;  ///< 50%
  std::vector<double> upper;   ///< 97.5%
};

/**
 * Pointwise quantiles of the concentration mean curve exp(f(t)) over the
 * posterior draws. patient_index selects a patient's theta draws; -1 uses the
 * population-level alpha draws. Grid times must be positive.
 */
PredictiveBand predictive_band(const PosteriorDraws& draws, int patient_index,
                               std::span<const double> time_grid, double dose);

}  // namespace popkit

#endif  // POPKIT_DIAGNOSTICS_HPP
