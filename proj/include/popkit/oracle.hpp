#ifndef POPKIT_ORACLE_HPP
#define POPKIT_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "popkit/kernels.hpp"

namespace popkit::oracle {

// Brute-force references used by the test suites. Nothing here shares code
// with the closed forms in pk_math beyond scalar arithmetic, so agreement
// between the two routes certifies both.

/**
 * Classical RK4 solution of the absorption/elimination system
 *   dA_a/dt = -k_a A_a,   A_a(0) = D,
 *   dA/dt   =  k_a A_a - k_e A,   A(0) = 0.
 * Returns (A_a(t_end), A(t_end)). Global error is O(h^4).
 */
std::pair<double, double> integrate_ode(double dose, double absorption_rate,
                                        double elimination_rate, double t_end, int n_steps);

/// Normalized density table produced by trapezoid quadrature on a uniform grid.
struct GridPosterior {
  std::vector<double> x;
  std::vector<double> density;  ///< integrates to 1 over [x.front(), x.back()]
  std::vector<double> cdf;      ///< cdf.front() = 0, cdf.back() = 1

  double mean() const;
  double variance() const;
  /// CDF evaluated by linear interpolation; clamps outside the grid.
  double cdf_at(double value) const;
};

/**
 * Tabulates a 1-D target density on [lo, hi]. The target must be effectively
 * supported inside the interval: both endpoint densities have to fall below
 * e^{-30} of the maximum, otherwise a support-truncation error is thrown.
 */
GridPosterior grid_posterior(const ScalarTarget& target, double lo, double hi, int n_points);

/**
 * grid_posterior with bounds grown automatically: starting from one prior
 * standard deviation around the target's prior mean (or around `center` when
 * no Gaussian factor is present), the interval doubles until the tail
 * criterion holds.
 */
GridPosterior auto_grid_posterior(const ScalarTarget& target, int n_points, double center = 0.0,
                                  double half_width = 1.0);

/// Two-sided Kolmogorov-Smirnov distance between a sample and a reference CDF.
template <typename Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace popkit::oracle

#endif  // POPKIT_ORACLE_HPP
