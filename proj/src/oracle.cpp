#include "popkit/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace popkit::oracle {

namespace {

struct State {
  double absorption;
  double central;
};

State derivative(const State& s, double ka, double ke) {
  return {-ka * s.absorption, ka * s.absorption - ke * s.central};
}

State axpy(const State& s, double h, const State& d) {
  return {s.absorption + h * d.absorption, s.central + h * d.central};
}

}  // namespace

std::pair<double, double> integrate_ode(double dose, double absorption_rate,
                                        double elimination_rate, double t_end, int n_steps) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("integrate_ode: t_end must be >= 0");
  if (n_steps < 100) throw std::invalid_argument("integrate_ode: n_steps must be >= 100");

  State s{dose, 0.0};
  if (t_end == 0.0) return {s.absorption, s.central};
  const double h = t_end / n_steps;
  for (int i = 0; i < n_steps; ++i) {
    const State k1 = derivative(s, absorption_rate, elimination_rate);
    const State k2 = derivative(axpy(s, 0.5 * h, k1), absorption_rate, elimination_rate);
    const State k3 = derivative(axpy(s, 0.5 * h, k2), absorption_rate, elimination_rate);
    const State k4 = derivative(axpy(s, h, k3), absorption_rate, elimination_rate);
    s.absorption += h / 6.0 * (k1.absorption + 2.0 * (k2.absorption + k3.absorption) + k4.absorption);
    s.central += h / 6.0 * (k1.central + 2.0 * (k2.central + k3.central) + k4.central);
  }
  return {s.absorption, s.central};
}

double GridPosterior::mean() const {
  // trapezoid moment against the normalized density
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    m += 0.5 * h * (x[i] * density[i] + x[i + 1] * density[i + 1]);
  }
  return m;
}

double GridPosterior::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    const double a = (x[i] - m) * (x[i] - m) * density[i];
    const double b = (x[i + 1] - m) * (x[i + 1] - m) * density[i + 1];
    v += 0.5 * h * (a + b);
  }
  return v;
}

double GridPosterior::cdf_at(double value) const {
  if (value <= x.front()) return 0.0;
  if (value >= x.back()) return 1.0;
  const auto it = std::upper_bound(x.begin(), x.end(), value);
  const std::size_t j = static_cast<std::size_t>(it - x.begin());
  const double frac = (value - x[j - 1]) / (x[j] - x[j - 1]);
  return cdf[j - 1] + frac * (cdf[j] - cdf[j - 1]);
}

GridPosterior grid_posterior(const ScalarTarget& target, double lo, double hi, int n_points) {
  if (!(hi > lo)) throw std::invalid_argument("grid_posterior: hi must exceed lo");
  if (n_points < 1000) throw std::invalid_argument("grid_posterior: n_points must be >= 1000");

  GridPosterior g;
  g.x.resize(n_points);
  std::vector<double> log_dens(n_points);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_points; ++i) {
    g.x[i] = lo + (hi - lo) * i / (n_points - 1);
    log_dens[i] = target.log_density(g.x[i]);
    if (log_dens[i] > max_log) max_log = log_dens[i];
  }
  if (!std::isfinite(max_log))
    throw std::runtime_error("grid_posterior: target has no finite density on the grid");
  if (log_dens.front() > max_log - 30.0 || log_dens.back() > max_log - 30.0)
    throw std::runtime_error("grid_posterior: support truncated at [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");

  g.density.resize(n_points);
  for (int i = 0; i < n_points; ++i) g.density[i] = std::exp(log_dens[i] - max_log);

  const double h = (hi - lo) / (n_points - 1);
  double total = 0.0;
  g.cdf.resize(n_points);
  g.cdf[0] = 0.0;
  for (int i = 1; i < n_points; ++i) {
    total += 0.5 * h * (g.density[i - 1] + g.density[i]);
    g.cdf[i] = total;
  }
  for (int i = 0; i < n_points; ++i) {
    g.density[i] /= total;
    g.cdf[i] /= total;
  }
  g.cdf[n_points - 1] = 1.0;
  return g;
}

GridPosterior auto_grid_posterior(const ScalarTarget& target, int n_points, double center,
                                  double half_width) {
  if (target.has_gaussian_factor) {
    center = target.prior_mean;
    half_width = std::max(half_width, std::sqrt(target.prior_variance));
  }
  for (int attempt = 0; attempt < 60; ++attempt) {
    try {
      return grid_posterior(target, center - half_width, center + half_width, n_points);
    } catch (const std::runtime_error&) {
      half_width *= 2.0;
    }
  }
  throw std::runtime_error("auto_grid_posterior: failed to bracket the target support");
}

}  // namespace popkit::oracle
